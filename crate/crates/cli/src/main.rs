use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rqmkit::{run_file, CommandKind, RunOptions};
use rqmkit_core::chain::DEFAULT_DIM_CAP;

/// Verify and solve random quantum map problems described in JSON.
///
/// Exit status: 0 all checks pass, 1 a check failed, 2 the problem file is
/// invalid, 3 a numerical routine broke down.
#[derive(Parser)]
#[command(name = "rqmkit", version)]
struct Cli {
    command: CommandKind,

    /// Problem file.
    spec: PathBuf,

    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Override every check tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Largest algebra dimension a chain level or skew product may reach.
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    dim_cap: usize,

    /// Depth for homogeneous chains and skew products that do not set one.
    #[arg(long)]
    depth: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        seed: cli.seed,
        tolerance: cli.tolerance,
        dim_cap: cli.dim_cap,
        depth: cli.depth,
    };
    let report = match run_file(&cli.spec, cli.command, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rqmkit: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    print!("{}", report.summary());
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("rqmkit: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
