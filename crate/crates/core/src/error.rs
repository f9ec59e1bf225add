use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dressed-state labeling is degenerate: eigenvalues {0:.3e} MHz apart at b = {1} G")]
    DegenerateLabeling(f64, f64),

    #[error("bracket [{lo}, {hi}] does not contain a sign change")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("time resolution too coarse: dt_max = {dt_max} us exceeds 1/(20 f_rf) = {bound} us")]
    Resolution { dt_max: f64, bound: f64 },

    #[error("noise trajectory covers [0, {covered}] us but the sequence needs {needed} us")]
    NoiseCoverage { covered: f64, needed: f64 },

    #[error("RF matrix element {0:.3e} is too small to drive the dressed qubit")]
    VanishingMatrixElement(f64),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("ambiguous frequency: spectral peaks at {0:.4} and {1:.4} MHz have comparable power")]
    AmbiguousFrequency(f64, f64),

    #[error("fit did not converge after {0} iterations")]
    NonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
