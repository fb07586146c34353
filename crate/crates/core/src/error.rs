use thiserror::Error;

/// Errors raised by the risk engine and its numerical building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty analyticity strip: {0}")]
    EmptyStrip(String),

    #[error("dampening parameter {r} outside admissible interval ({lo}, {hi})")]
    Dampening { r: f64, lo: f64, hi: f64 },

    #[error("transform evaluated outside its validity interval: Im(z) = {im} not in ({lo}, {hi})")]
    OutsideValidity { im: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("integrand returned a non-finite value at u = {0}")]
    NonFinite(f64),

    #[error("no sign change found on [{a}, {b}] after bracket expansion")]
    NoBracket { a: f64, b: f64 },

    #[error("root finding exceeded {0} iterations")]
    MaxIterations(usize),

    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("probability {0} outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange(f64),

    #[error("entropic loss is evaluated in closed form, not through Fourier pieces")]
    ClosedFormPath,

    #[error("piecewise-linear allocation is computed from the quantile function")]
    QuantilePath,

    #[error("contribution dampening infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, RiskError>;
