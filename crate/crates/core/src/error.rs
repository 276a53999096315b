use thiserror::Error;

/// Errors raised by the algebraic and dynamical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid algebra specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("not a morphism: {identity} violated (residual {residual:.3e})")]
    NotMorphism { identity: String, residual: f64 },

    #[error("not completely positive: Choi block (codomain {codomain_block}, domain {domain_block}) has eigenvalue {eigenvalue:.3e}")]
    ChoiNegative {
        codomain_block: usize,
        domain_block: usize,
        eigenvalue: f64,
    },

    #[error("not unital: |F(1) - 1| = {residual:.3e}")]
    NonUnital { residual: f64 },

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("kernel row {row} is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },

    #[error("dimension cap exceeded: {required} entries required, {allowed} allowed")]
    DimensionCap { required: usize, allowed: usize },

    #[error("level {level} out of range for depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),

    #[error("chain is not homogeneous")]
    NotHomogeneous,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
