//! Risk measures for distributions given by their moment generating
//! function.
//!
//! Value at Risk, Conditional Value at Risk and the entropic and
//! polynomial optimized certainty equivalents are computed by a
//! deterministic root search followed by Fourier quadrature. Risk
//! contributions use a two-dimensional Fourier integral, and a Monte
//! Carlo oracle provides independent estimates for validation.

pub mod contrib;
pub mod engine;
pub mod error;
pub mod loss;
pub mod mgf;
pub mod numerics;
pub mod oracle;
pub mod reference;

pub use contrib::{
    rc_cvar_fourier, rc_general_mc, ContributionDampening, ContributionResult, Portfolio,
};
pub use engine::{Dampening, Engine, OceResult, RiskQuery};
pub use error::{Result, RiskError};
pub use loss::{LossSpec, Side};
pub use mgf::{
    nig_reference_sets, AnalyticityStrip, DecayHint, JointMgfModel, MgfModel, NigParams,
};
pub use numerics::{QuadratureConfig, RootConfig};
pub use oracle::McEstimate;
