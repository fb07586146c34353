//! Risk contributions `RC(X; Y) = -E[Y l'(eta* - X)]` of a position `Y`
//! to a portfolio `X`.
//!
//! For CV@R (`l(x) = gamma2 x^+`) and `X = Z + Y` the contribution is a
//! sum of two plane integrals of the joint MGF of `(Z, Y)`:
//!
//! ```text
//! RC = gamma2 / (4 pi^2) * [ I(R) - I(R') ],
//! I(R) = integral of M(R1 + iu1, R2 + iu2) exp(-(R1 + iu1) eta)
//!        / ((R1 + iu1) (u1 - u2 + i (R2 - R1))^2) du1 du2,
//! ```
//!
//! with `R1 < 0` and `R2 < R1` in the first term (it carries the `Y < 0`
//! part of the payoff) and `R1' < 0`, `R2' > R1'` in the second (the
//! `Y > 0` part). Both points must lie in the joint MGF domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::engine::Engine;
use crate::error::{Result, RiskError};
use crate::loss::LossSpec;
use crate::mgf::{JointDomain, JointMgfModel, MgfModel};
use crate::numerics::{integrate_plane, real_part};
use crate::oracle::{draw_model, mc_contribution, sample_with};

/// Contribution estimate. For continuous laws and differentiable losses
/// the bounds coincide with the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContributionResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub quad_err: f64,
    /// Monte Carlo standard error, when sampled.
    pub std_error: Option<f64>,
}

/// Positions of a portfolio.
#[derive(Debug, Clone)]
pub enum Portfolio {
    /// Independent positions.
    Independent(Vec<MgfModel>),
    /// Positions `U = A Y` driven by independent factors `Y`.
    Mixture {
        matrix: Vec<Vec<f64>>,
        factors: Vec<MgfModel>,
    },
}

impl Portfolio {
    pub fn len(&self) -> usize {
        match self {
            Portfolio::Independent(c) => c.len(),
            Portfolio::Mixture { matrix, .. } => matrix.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// MGF of the sum of all positions.
    pub fn aggregate(&self) -> Result<MgfModel> {
        match self {
            Portfolio::Independent(c) => MgfModel::independent_sum(c),
            Portfolio::Mixture { matrix, factors } => MgfModel::linear_mixture(matrix, factors),
        }
    }

    /// Joint MGF of (rest of the portfolio, position `pick`).
    pub fn joint(&self, pick: usize) -> Result<JointMgfModel> {
        match self {
            Portfolio::Independent(c) => JointMgfModel::independent(c, pick),
            Portfolio::Mixture { matrix, factors } => JointMgfModel::mixture(matrix, factors, pick),
        }
    }

    /// `n` joint draws, returned as `(portfolio totals, position pick)`.
    pub fn sample_pair(&self, pick: usize, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        if pick >= self.len() {
            return Err(RiskError::InvalidParameter(format!(
                "pick index {pick} out of range for {} positions",
                self.len()
            )));
        }
        let draw_pair = |rng: &mut rand::rngs::StdRng| -> (f64, f64) {
            match self {
                Portfolio::Independent(c) => {
                    let mut total = 0.0;
                    let mut picked = 0.0;
                    for (i, m) in c.iter().enumerate() {
                        let v = draw_model(rng, m);
                        total += v;
                        if i == pick {
                            picked = v;
                        }
                    }
                    (total, picked)
                }
                Portfolio::Mixture { matrix, factors } => {
                    let y: Vec<f64> = factors.iter().map(|f| draw_model(rng, f)).collect();
                    let position =
                        |row: &Vec<f64>| row.iter().zip(&y).map(|(a, v)| a * v).sum::<f64>();
                    let total = matrix.iter().map(position).sum();
                    (total, position(&matrix[pick]))
                }
            }
        };
        Ok(sample_with(n, seed, draw_pair).into_iter().unzip())
    }
}

/// Dampening points for the two plane integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContributionDampening {
    /// `(R1, R2)` with `R2 < R1 < 0`.
    pub negative: (f64, f64),
    /// `(R1', R2')` with `R1' < 0 < R2'` or at least `R2' > R1'`.
    pub positive: (f64, f64),
}

impl ContributionDampening {
    /// Defaults from the axis extents of the joint domain, shrunk toward
    /// the origin until both points are inside.
    pub fn default_for(domain: &JointDomain) -> Result<Self> {
        let (lo_z, _) = domain.ray_extent(1.0, 0.0);
        let (lo_y, hi_y) = domain.ray_extent(0.0, 1.0);
        let edge = |v: f64| if v.is_finite() { v } else { -1.0 };
        let (lo_z, lo_y) = (edge(lo_z), edge(lo_y));
        let hi_y = if hi_y.is_finite() { hi_y } else { 1.0 };
        if !(lo_z < 0.0 && lo_y < 0.0 && hi_y > 0.0) {
            return Err(RiskError::Infeasible(format!(
                "joint domain does not contain a neighbourhood of 0 (Z from {lo_z}, Y in ({lo_y}, {hi_y}))"
            )));
        }
        let r1 = 0.3 * lo_z.max(lo_y);
        let shrink = |p: (f64, f64)| -> Result<(f64, f64)> {
            let mut p = p;
            for _ in 0..60 {
                if domain.contains(p.0, p.1) {
                    return Ok(p);
                }
                p = (0.8 * p.0, 0.8 * p.1);
            }
            Err(RiskError::Infeasible(format!(
                "no admissible dampening point along the ray through {p:?}"
            )))
        };
        Ok(Self {
            negative: shrink((r1, 0.6 * lo_y))?,
            positive: shrink((r1, 0.5 * hi_y))?,
        })
    }

    pub fn validate(&self, domain: &JointDomain) -> Result<()> {
        let (r1, r2) = self.negative;
        let (s1, s2) = self.positive;
        let ok = r1 < 0.0 && r2 < r1 && s1 < 0.0 && s2 > s1;
        if !ok {
            return Err(RiskError::Infeasible(format!(
                "need R2 < R1 < 0 and R1' < 0, R2' > R1'; got R = {:?}, R' = {:?}",
                self.negative, self.positive
            )));
        }
        for (a, b) in [self.negative, self.positive] {
            if !domain.contains(a, b) {
                return Err(RiskError::Infeasible(format!(
                    "dampening point ({a}, {b}) outside the joint MGF domain"
                )));
            }
        }
        Ok(())
    }
}

fn plane_term(
    engine: &Engine,
    joint: &JointMgfModel,
    eta: f64,
    (r1, r2): (f64, f64),
) -> Result<(Complex64, f64)> {
    let (dz, dy) = joint.decay();
    let f = |u1: f64, u2: f64| {
        let a = Complex64::new(r1, u1);
        let b = Complex64::new(r2, u2);
        let w = Complex64::new(u1 - u2, r2 - r1);
        joint.eval(a, b) * (-a * eta).exp() / (a * w * w)
    };
    let r = integrate_plane(f, &engine.quadrature, (dz.rate(), dy.rate()))?;
    Ok((r.value, r.err_est))
}

/// CV@R contribution of position `pick` at level `lambda` by the plane
/// Fourier representation. `eta*` is the quantile of the aggregate.
pub fn rc_cvar_fourier(
    engine: &Engine,
    portfolio: &Portfolio,
    pick: usize,
    lambda: f64,
    dampening: Option<ContributionDampening>,
) -> Result<ContributionResult> {
    let loss = LossSpec::cvar(lambda)?;
    let gamma2 = match loss {
        LossSpec::PiecewiseLinear { gamma2, .. } => gamma2,
        _ => unreachable!("cvar loss is piecewise linear"),
    };
    let aggregate = portfolio.aggregate()?;
    let joint = portfolio.joint(pick)?;
    if portfolio.len() == 1 {
        // The rest is identically 0 and its MGF does not decay; by
        // homogeneity the sole position carries the whole CV@R.
        let r = engine.cvar(&aggregate, lambda)?;
        return Ok(ContributionResult {
            value: r.rho,
            lower: r.rho,
            upper: r.rho,
            quad_err: r.quad_err,
            std_error: None,
        });
    }
    let q = engine.quantile(&aggregate, lambda)?;
    let damp = match dampening {
        Some(d) => d,
        None => ContributionDampening::default_for(joint.domain())?,
    };
    damp.validate(joint.domain())?;
    let (neg, neg_err) = plane_term(engine, &joint, q.x, damp.negative)?;
    let (pos, pos_err) = plane_term(engine, &joint, q.x, damp.positive)?;
    let scale = gamma2 / (4.0 * PI * PI);
    let err = scale * (neg_err + pos_err);
    let value = real_part(
        (neg - pos) * scale,
        (10.0 * err).max(10.0 * engine.quadrature.abs_tol),
    )?;
    Ok(ContributionResult {
        value,
        lower: value,
        upper: value,
        quad_err: err,
        std_error: None,
    })
}

/// Monte Carlo contribution `-E[Y l'(eta* - X)]` for any loss.
pub fn rc_general_mc(
    portfolio: &Portfolio,
    pick: usize,
    loss: &LossSpec,
    eta_star: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ContributionResult> {
    let (x, y) = portfolio.sample_pair(pick, n_samples, seed)?;
    let (value, lower, upper, se) = mc_contribution(&x, &y, loss, eta_star)?;
    Ok(ContributionResult {
        value,
        lower,
        upper,
        quad_err: 0.0,
        std_error: Some(se),
    })
}
