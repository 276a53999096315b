//! Batch front-end for `rqmkit-core`: load a JSON problem file, run the
//! requested verifications and solvers, and emit a structured report.

pub mod error;
pub mod report;
pub mod run;
pub mod spec;

use std::path::Path;

pub use error::CliError;
pub use report::Report;
pub use run::{run, RunOptions};
pub use spec::{parse_spec, CommandKind, LoadOptions, Problem};

/// Read, validate and run a problem file.
pub fn run_file(path: &Path, kind: CommandKind, opts: RunOptions) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let load = LoadOptions {
        seed: opts.seed,
        tolerance: opts.tolerance.unwrap_or(rqmkit_core::DEFAULT_TOL),
    };
    let mut problem = parse_spec(&text, load)?;
    run(&mut problem, kind, opts)
}
