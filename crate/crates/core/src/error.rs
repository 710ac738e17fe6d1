use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count must be in 1..={max}, got {n}")]
    QubitCount { n: usize, max: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("depth {depth} out of range 1..={n}")]
    DepthOutOfRange { depth: usize, n: usize },

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("basis strings are identical")]
    IdenticalStrings,

    #[error("coefficient at depth {depth} is zero")]
    ZeroCoefficient { depth: usize },

    #[error("profiles of the two instances differ")]
    ProfileMismatch,

    #[error("degenerate conditional at qubit {qubit}: running weight {weight}")]
    DegenerateConditional { qubit: usize, weight: f64 },

    #[error("probability {value} is negative beyond rounding tolerance")]
    NegativeProbability { value: f64 },

    #[error("support mismatch: outcome {outcome} has p0 = {p0} but p1 = 0")]
    SupportMismatch { outcome: u64, p0: f64 },

    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },

    #[error("non-Hermitian input: |A_ij - conj(A_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("Born probability has imaginary part {imag:e}")]
    ComplexProbability { imag: f64 },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("budget must be at least 1")]
    ZeroBudget,

    #[error("need at least {needed} points for the fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("budget {0} is not positive; cannot take a logarithm")]
    NonPositiveBudget(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
