use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    RootNonConvergence {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("path passes within {distance:e} of turning point {point} (clearance {clearance:e})")]
    Clearance {
        point: Complex64,
        distance: f64,
        clearance: f64,
    },

    #[error("seed {seed} does not square to P(start) = {value}")]
    SeedMismatch { seed: Complex64, value: Complex64 },

    #[error("degenerate pair: turning points {0} and {1} coincide")]
    DegeneratePair(usize, usize),

    #[error("branch of sqrt(P) is not single-valued on the contour (enclosed multiplicity {0})")]
    BranchInconsistency(usize),

    #[error("trace failed near {last}: {reason}")]
    Trace { last: Complex64, reason: String },

    #[error("stokes graph is incomplete ({0} truncated trajectories)")]
    IncompleteGraph(usize),

    #[error("non-generic configuration: {0}")]
    NonGeneric(String),

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),
}
