//! Distributions represented by their moment generating function.
//!
//! Every model carries the open real interval on which `E[exp(uX)]` is
//! finite (the analyticity strip) and can be evaluated at any complex point
//! whose real part lies in that interval. Scenario constructors compose
//! models: compound sums (insurance claims), default mixtures (credit
//! portfolios), and linear factor mixtures. Joint models for a pair
//! `(Z, Y)` feed the risk-contribution integrals.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};

/// Default cut-off for the neglected tail mass of a claim-count distribution.
pub const DEFAULT_PMF_TAIL: f64 = 1e-12;

const PMF_NORMALIZATION_TOL: f64 = 1e-12;

/// Open interval `(lo, hi)` of real arguments where the MGF is finite.
/// Either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityStrip {
    lo: f64,
    hi: f64,
}

impl AnalyticityStrip {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(RiskError::EmptyStrip(format!("({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn whole_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, r: f64) -> bool {
        self.lo < r && r < self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `None` when the two intervals do not overlap.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }

    /// The set `{r : c * r in self}`.
    pub fn preimage_scaled(&self, c: f64) -> Option<Self> {
        if c == 0.0 {
            return self.contains_zero().then(Self::whole_line);
        }
        let (a, b) = (self.lo / c, self.hi / c);
        Self::new(a.min(b), a.max(b)).ok()
    }

    /// The reflected interval `{r : -r in self}`.
    pub fn negated(&self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl fmt::Display for AnalyticityStrip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Lower bound on the exponential decay of `|M(iu - R)|` in `|u|`.
///
/// Drives the truncation of Fourier integrals. `Unknown` forces the
/// quadrature into its doubling mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayHint {
    Exponential { rate: f64 },
    Unknown,
}

impl DecayHint {
    pub fn rate(&self) -> Option<f64> {
        match *self {
            DecayHint::Exponential { rate } if rate > 0.0 => Some(rate),
            _ => None,
        }
    }

    fn from_rate(rate: f64) -> Self {
        if rate > 0.0 && rate.is_finite() {
            DecayHint::Exponential { rate }
        } else {
            DecayHint::Unknown
        }
    }
}

/// Normal inverse Gaussian parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

impl NigParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        let finite = [alpha, beta, delta, mu].iter().all(|v| v.is_finite());
        if !finite {
            return Err(RiskError::InvalidParameter(
                "NIG parameters must be finite".into(),
            ));
        }
        if alpha <= 0.0 {
            return Err(RiskError::InvalidParameter(format!(
                "NIG requires alpha > 0, got {alpha}"
            )));
        }
        if beta.abs() >= alpha {
            return Err(RiskError::InvalidParameter(format!(
                "NIG requires |beta| < alpha, got beta = {beta}, alpha = {alpha}"
            )));
        }
        if delta <= 0.0 {
            return Err(RiskError::InvalidParameter(format!(
                "NIG requires delta > 0, got {delta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            delta,
            mu,
        })
    }

    /// `sqrt(alpha^2 - beta^2)`.
    pub fn gamma(&self) -> f64 {
        (self.alpha * self.alpha - self.beta * self.beta).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.mu + self.delta * self.beta / self.gamma()
    }

    pub fn variance(&self) -> f64 {
        let g = self.gamma();
        self.delta * self.alpha * self.alpha / (g * g * g)
    }

    pub fn strip(&self) -> AnalyticityStrip {
        AnalyticityStrip {
            lo: -self.alpha - self.beta,
            hi: self.alpha - self.beta,
        }
    }

    /// Law of `X + m`.
    pub fn shifted(&self, m: f64) -> Self {
        Self {
            mu: self.mu + m,
            ..*self
        }
    }

    /// Law of `c X` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(RiskError::InvalidParameter(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Self::new(self.alpha / c, self.beta / c, self.delta * c, self.mu * c)
    }
}

/// The four NIG parameter sets used throughout the numerical study, with
/// `mu = 0`: daily returns, monthly returns, option-implied, and a
/// heavy-tailed unit-variance set.
pub fn nig_reference_sets() -> [NigParams; 4] {
    [
        NigParams {
            alpha: 106.0,
            beta: -26.0,
            delta: 0.0110,
            mu: 0.0,
        },
        NigParams {
            alpha: 26.0,
            beta: -10.6,
            delta: 0.0070,
            mu: 0.0,
        },
        NigParams {
            alpha: 6.2,
            beta: -3.9,
            delta: 0.0011,
            mu: 0.0,
        },
        NigParams {
            alpha: 1.0,
            beta: 0.0,
            delta: 1.0,
            mu: 0.0,
        },
    ]
}

/// The distributional building block behind an [`MgfModel`].
#[derive(Debug, Clone)]
pub enum Law {
    /// Degenerate law at a constant.
    PointMass(f64),
    Nig(NigParams),
    /// `X = X_1 + ... + X_N` with `N` independent of the claims.
    /// A single claim model means i.i.d. claims.
    Compound {
        pmf: Vec<f64>,
        claims: Vec<MgfModel>,
    },
    /// `X = sum Z_i U_i` with independent Bernoulli default indicators.
    DefaultMixture {
        probs: Vec<f64>,
        exposures: Vec<MgfModel>,
    },
    /// `X = sum_l w_l Y_l` with independent factors, `w_l` the column sums
    /// of the mixing matrix.
    LinearMixture {
        weights: Vec<f64>,
        factors: Vec<MgfModel>,
    },
}

/// A distribution given by its moment generating function.
///
/// Immutable after construction and cheap to clone.
#[derive(Debug, Clone)]
pub struct MgfModel {
    law: Arc<Law>,
    strip: AnalyticityStrip,
    decay: DecayHint,
    descriptor: String,
}

/// Mean and standard deviation estimated from the cumulant generating
/// function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl MgfModel {
    pub fn point_mass(m: f64) -> Self {
        Self {
            law: Arc::new(Law::PointMass(m)),
            strip: AnalyticityStrip::whole_line(),
            decay: DecayHint::Unknown,
            descriptor: format!("PointMass({m})"),
        }
    }

    pub fn nig(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        Ok(Self::from_nig(NigParams::new(alpha, beta, delta, mu)?))
    }

    pub fn from_nig(p: NigParams) -> Self {
        Self {
            law: Arc::new(Law::Nig(p)),
            strip: p.strip(),
            decay: DecayHint::Exponential { rate: p.delta },
            descriptor: format!(
                "NIG(alpha={}, beta={}, delta={}, mu={})",
                p.alpha, p.beta, p.delta, p.mu
            ),
        }
    }

    /// Random sum with claim-count probabilities `count_pmf[i] = P(N = i)`.
    ///
    /// Trailing pmf mass below [`DEFAULT_PMF_TAIL`] is dropped and the
    /// remainder renormalized.
    pub fn compound(count_pmf: &[f64], claims: &[MgfModel]) -> Result<Self> {
        Self::compound_with_tail(count_pmf, claims, DEFAULT_PMF_TAIL)
    }

    pub fn compound_with_tail(
        count_pmf: &[f64],
        claims: &[MgfModel],
        tail_eps: f64,
    ) -> Result<Self> {
        if count_pmf.is_empty() {
            return Err(RiskError::InvalidParameter("empty claim-count pmf".into()));
        }
        if count_pmf.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(RiskError::InvalidParameter(
                "claim-count probabilities must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = count_pmf.iter().sum();
        if (total - 1.0).abs() > PMF_NORMALIZATION_TOL {
            return Err(RiskError::InvalidParameter(format!(
                "claim-count pmf sums to {total}, not 1"
            )));
        }
        // Truncate where the cumulative tail drops below tail_eps.
        let mut len = count_pmf.len();
        let mut tail = 0.0;
        while len > 1 && tail + count_pmf[len - 1] < tail_eps {
            tail += count_pmf[len - 1];
            len -= 1;
        }
        let kept = &count_pmf[..len];
        let kept_total: f64 = kept.iter().sum();
        let pmf: Vec<f64> = kept.iter().map(|p| p / kept_total).collect();
        let max_count = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);

        if max_count > 0 && claims.is_empty() {
            return Err(RiskError::InvalidParameter(
                "positive claim counts but no claim distributions".into(),
            ));
        }
        let iid = claims.len() == 1;
        if !iid && max_count > claims.len() {
            return Err(RiskError::InvalidParameter(format!(
                "pmf supports {max_count} claims but only {} claim models given",
                claims.len()
            )));
        }
        let claim_at = |j: usize| if iid { &claims[0] } else { &claims[j] };

        let mut strip = AnalyticityStrip::whole_line();
        for j in 0..max_count {
            let c = claim_at(j);
            if !c.strip.contains_zero() {
                return Err(RiskError::EmptyStrip(format!(
                    "claim {j} strip {} does not contain 0",
                    c.strip
                )));
            }
            strip = strip
                .intersect(&c.strip)
                .ok_or_else(|| RiskError::EmptyStrip("claim strips do not intersect".into()))?;
        }

        // An atom at zero kills decay; otherwise the slowest term dominates.
        let decay = if pmf[0] > 0.0 {
            DecayHint::Unknown
        } else {
            let mut cumulative = Some(0.0);
            let mut slowest = f64::INFINITY;
            for (i, &p) in pmf.iter().enumerate().skip(1) {
                cumulative = cumulative
                    .zip(claim_at(i - 1).decay.rate())
                    .map(|(c, r)| c + r);
                match cumulative {
                    Some(c) if p > 0.0 => slowest = slowest.min(c),
                    Some(_) => {}
                    None => {
                        slowest = f64::NAN;
                        break;
                    }
                }
            }
            DecayHint::from_rate(slowest)
        };

        let descriptor = format!(
            "Compound(pmf[{}], claims=[{}])",
            pmf.len(),
            claims
                .iter()
                .map(|c| c.descriptor.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        Ok(Self {
            law: Arc::new(Law::Compound {
                pmf,
                claims: claims.to_vec(),
            }),
            strip,
            decay,
            descriptor,
        })
    }

    /// Credit-style portfolio loss with independent default indicators.
    pub fn default_mixture(default_probs: &[f64], exposures: &[MgfModel]) -> Result<Self> {
        if default_probs.len() != exposures.len() {
            return Err(RiskError::InvalidParameter(format!(
                "{} default probabilities for {} exposures",
                default_probs.len(),
                exposures.len()
            )));
        }
        if default_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(RiskError::InvalidParameter(
                "default probabilities must lie in [0, 1]".into(),
            ));
        }
        let mut strip = AnalyticityStrip::whole_line();
        let mut rate = 0.0;
        for (i, (&p, e)) in default_probs.iter().zip(exposures).enumerate() {
            if p == 0.0 {
                continue;
            }
            if !e.strip.contains_zero() {
                return Err(RiskError::EmptyStrip(format!(
                    "exposure {i} strip {} does not contain 0",
                    e.strip
                )));
            }
            strip = strip
                .intersect(&e.strip)
                .ok_or_else(|| RiskError::EmptyStrip("exposure strips do not intersect".into()))?;
            if p == 1.0 {
                if let Some(r) = e.decay.rate() {
                    rate += r;
                }
            }
        }
        let descriptor = format!("DefaultMixture(n={})", exposures.len());
        Ok(Self {
            law: Arc::new(Law::DefaultMixture {
                probs: default_probs.to_vec(),
                exposures: exposures.to_vec(),
            }),
            strip,
            decay: DecayHint::from_rate(rate),
            descriptor,
        })
    }

    /// `X = sum_i U_i` with `U = A Y` for an `n x m` mixing matrix `A`.
    pub fn linear_mixture(mixing_matrix: &[Vec<f64>], factors: &[MgfModel]) -> Result<Self> {
        let weights = column_sums(mixing_matrix, factors.len())?;
        Self::weighted_sum(&weights, factors)
    }

    /// Sum of independent components.
    pub fn independent_sum(components: &[MgfModel]) -> Result<Self> {
        if components.is_empty() {
            return Ok(Self::point_mass(0.0));
        }
        Self::weighted_sum(&vec![1.0; components.len()], components)
    }

    /// `X = sum_l w_l Y_l` for independent `Y_l`.
    pub fn weighted_sum(weights: &[f64], factors: &[MgfModel]) -> Result<Self> {
        if weights.len() != factors.len() {
            return Err(RiskError::InvalidParameter(format!(
                "{} weights for {} factors",
                weights.len(),
                factors.len()
            )));
        }
        let mut strip = AnalyticityStrip::whole_line();
        let mut rate = 0.0;
        for (l, (&w, f)) in weights.iter().zip(factors).enumerate() {
            if !w.is_finite() {
                return Err(RiskError::InvalidParameter(format!(
                    "weight {l} is not finite"
                )));
            }
            if !f.strip.contains_zero() {
                return Err(RiskError::EmptyStrip(format!(
                    "factor {l} strip {} does not contain 0",
                    f.strip
                )));
            }
            if w == 0.0 {
                continue;
            }
            let pre = f.strip.preimage_scaled(w).ok_or_else(|| {
                RiskError::EmptyStrip(format!("factor {l} strip scaled by {w} is empty"))
            })?;
            strip = strip.intersect(&pre).ok_or_else(|| {
                RiskError::EmptyStrip("scaled factor strips do not intersect".into())
            })?;
            if let Some(r) = f.decay.rate() {
                rate += r * w.abs();
            }
        }
        let descriptor = format!(
            "LinearMixture(weights={:?}, factors=[{}])",
            weights,
            factors
                .iter()
                .map(|c| c.descriptor.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        Ok(Self {
            law: Arc::new(Law::LinearMixture {
                weights: weights.to_vec(),
                factors: factors.to_vec(),
            }),
            strip,
            decay: DecayHint::from_rate(rate),
            descriptor,
        })
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn strip(&self) -> AnalyticityStrip {
        self.strip
    }

    pub fn decay(&self) -> DecayHint {
        self.decay
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// `E[exp(zX)]` for `Re(z)` inside the strip.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        debug_assert!(
            self.strip.contains(z.re) || z.re == 0.0,
            "Re(z) = {} outside strip {}",
            z.re,
            self.strip
        );
        match &*self.law {
            Law::PointMass(m) => (z * m).exp(),
            Law::Nig(p) => nig_eval(p, z),
            Law::Compound { pmf, claims } => {
                let mut acc = Complex64::new(pmf[0], 0.0);
                let mut running = Complex64::new(1.0, 0.0);
                let iid = claims.len() == 1;
                let iid_value = if iid { Some(claims[0].eval(z)) } else { None };
                for (i, &p) in pmf.iter().enumerate().skip(1) {
                    let factor = match iid_value {
                        Some(v) => v,
                        None => claims[i - 1].eval(z),
                    };
                    running *= factor;
                    if p > 0.0 {
                        acc += running * p;
                    }
                }
                acc
            }
            Law::DefaultMixture { probs, exposures } => probs
                .iter()
                .zip(exposures)
                .filter(|(&p, _)| p > 0.0)
                .fold(Complex64::new(1.0, 0.0), |acc, (&p, e)| {
                    acc * (e.eval(z) * p + (1.0 - p))
                }),
            Law::LinearMixture { weights, factors } => weights
                .iter()
                .zip(factors)
                .filter(|(&w, _)| w != 0.0)
                .fold(Complex64::new(1.0, 0.0), |acc, (&w, f)| acc * f.eval(z * w)),
        }
    }

    /// `E[exp(rX)]` for real `r` in the strip.
    pub fn eval_real(&self, r: f64) -> f64 {
        self.eval(Complex64::new(r, 0.0)).re
    }

    /// Mean and standard deviation from central differences of `ln M` at 0.
    ///
    /// Only used for bracketing and dampening heuristics; the step is
    /// `1e-4` times the distance from 0 to the nearer strip edge.
    pub fn moments(&self) -> Moments {
        if let Law::Nig(p) = &*self.law {
            return Moments {
                mean: p.mean(),
                std: p.variance().sqrt(),
            };
        }
        let edge = self.strip.hi.min(-self.strip.lo).min(1.0);
        let h = 1e-4 * edge;
        let k_plus = self.eval_real(h).ln();
        let k_minus = self.eval_real(-h).ln();
        let mean = (k_plus - k_minus) / (2.0 * h);
        let variance = ((k_plus + k_minus) / (h * h)).max(0.0);
        Moments {
            mean,
            std: variance.sqrt(),
        }
    }
}

fn nig_eval(p: &NigParams, z: Complex64) -> Complex64 {
    let shifted = z + p.beta;
    let radicand = p.alpha * p.alpha - shifted * shifted;
    // Principal branch; inside the strip the radicand never touches the
    // negative real axis.
    debug_assert!(
        !(radicand.re < 0.0 && radicand.im == 0.0),
        "NIG radicand {radicand} on the branch cut"
    );
    (z * p.mu + (radicand.sqrt() * -1.0 + p.gamma()) * p.delta).exp()
}

/// NIG model with strip `(-alpha - beta, alpha - beta)`.
pub fn nig_mgf(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<MgfModel> {
    MgfModel::nig(alpha, beta, delta, mu)
}

pub fn compound_mgf(count_pmf: &[f64], claim_mgfs: &[MgfModel]) -> Result<MgfModel> {
    MgfModel::compound(count_pmf, claim_mgfs)
}

pub fn default_mixture_mgf(default_probs: &[f64], exposure_mgfs: &[MgfModel]) -> Result<MgfModel> {
    MgfModel::default_mixture(default_probs, exposure_mgfs)
}

pub fn linear_mixture_mgf(
    mixing_matrix: &[Vec<f64>],
    factor_mgfs: &[MgfModel],
) -> Result<MgfModel> {
    MgfModel::linear_mixture(mixing_matrix, factor_mgfs)
}

pub fn joint_mgf_independent(component_mgfs: &[MgfModel], pick: usize) -> Result<JointMgfModel> {
    JointMgfModel::independent(component_mgfs, pick)
}

pub fn joint_mgf_mixture(
    mixing_matrix: &[Vec<f64>],
    factor_mgfs: &[MgfModel],
    pick: usize,
) -> Result<JointMgfModel> {
    JointMgfModel::mixture(mixing_matrix, factor_mgfs, pick)
}

fn column_sums(matrix: &[Vec<f64>], m: usize) -> Result<Vec<f64>> {
    if matrix.is_empty() {
        return Err(RiskError::InvalidParameter("empty mixing matrix".into()));
    }
    let mut sums = vec![0.0; m];
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != m {
            return Err(RiskError::InvalidParameter(format!(
                "mixing matrix row {i} has {} columns, expected {m}",
                row.len()
            )));
        }
        for (s, a) in sums.iter_mut().zip(row) {
            *s += a;
        }
    }
    Ok(sums)
}

/// One linear constraint `lo < c1 r1 + c2 r2 < hi` of a joint domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub c1: f64,
    pub c2: f64,
    pub strip: AnalyticityStrip,
}

/// Set of real pairs `(r1, r2)` where a joint MGF is finite: an
/// intersection of open bands (a rectangle in the independent case).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDomain {
    bands: Vec<Band>,
}

impl JointDomain {
    pub fn rectangle(first: AnalyticityStrip, second: AnalyticityStrip) -> Self {
        Self {
            bands: vec![
                Band {
                    c1: 1.0,
                    c2: 0.0,
                    strip: first,
                },
                Band {
                    c1: 0.0,
                    c2: 1.0,
                    strip: second,
                },
            ],
        }
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        self.bands
            .iter()
            .all(|b| b.strip.contains(b.c1 * r1 + b.c2 * r2))
    }

    /// Range of `t` for which `t * (d1, d2)` stays inside the domain.
    pub fn ray_extent(&self, d1: f64, d2: f64) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for b in &self.bands {
            let c = b.c1 * d1 + b.c2 * d2;
            if c == 0.0 {
                continue;
            }
            let (a, e) = (b.strip.lo / c, b.strip.hi / c);
            lo = lo.max(a.min(e));
            hi = hi.min(a.max(e));
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
enum JointLaw {
    Independent {
        rest: MgfModel,
        pick: MgfModel,
    },
    Mixture {
        factors: Vec<MgfModel>,
        rest_weights: Vec<f64>,
        pick_weights: Vec<f64>,
    },
}

/// MGF of the pair `(Z, Y)` where `Y` is one portfolio position and `Z`
/// the sum of the others.
#[derive(Debug, Clone)]
pub struct JointMgfModel {
    law: JointLaw,
    domain: JointDomain,
    decay: (DecayHint, DecayHint),
}

impl JointMgfModel {
    /// Independent components; `pick` is a zero-based index.
    pub fn independent(components: &[MgfModel], pick: usize) -> Result<Self> {
        if pick >= components.len() {
            return Err(RiskError::InvalidParameter(format!(
                "pick index {pick} out of range for {} components",
                components.len()
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if !c.strip.contains_zero() {
                return Err(RiskError::EmptyStrip(format!(
                    "component {i} strip {} does not contain 0",
                    c.strip
                )));
            }
        }
        let rest: Vec<MgfModel> = components
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pick)
            .map(|(_, c)| c.clone())
            .collect();
        let rest = MgfModel::independent_sum(&rest)?;
        let pick = components[pick].clone();
        let domain = JointDomain::rectangle(rest.strip, pick.strip);
        let decay = (rest.decay, pick.decay);
        Ok(Self {
            law: JointLaw::Independent { rest, pick },
            domain,
            decay,
        })
    }

    /// Linear mixture `U = A Y`; the picked position is row `pick` of `A`.
    pub fn mixture(mixing_matrix: &[Vec<f64>], factors: &[MgfModel], pick: usize) -> Result<Self> {
        let m = factors.len();
        let all = column_sums(mixing_matrix, m)?;
        if pick >= mixing_matrix.len() {
            return Err(RiskError::InvalidParameter(format!(
                "pick index {pick} out of range for {} positions",
                mixing_matrix.len()
            )));
        }
        let pick_weights = mixing_matrix[pick].clone();
        let rest_weights: Vec<f64> = all.iter().zip(&pick_weights).map(|(a, p)| a - p).collect();
        let mut bands = Vec::new();
        let mut rate_rest = f64::INFINITY;
        let mut rate_pick = f64::INFINITY;
        for (k, f) in factors.iter().enumerate() {
            if !f.strip.contains_zero() {
                return Err(RiskError::EmptyStrip(format!(
                    "factor {k} strip {} does not contain 0",
                    f.strip
                )));
            }
            let (b, a) = (rest_weights[k], pick_weights[k]);
            if b == 0.0 && a == 0.0 {
                continue;
            }
            bands.push(Band {
                c1: b,
                c2: a,
                strip: f.strip,
            });
            let r = f.decay.rate().unwrap_or(0.0);
            if b != 0.0 {
                rate_rest = rate_rest.min(r * b.abs());
            }
            if a != 0.0 {
                rate_pick = rate_pick.min(r * a.abs());
            }
        }
        Ok(Self {
            law: JointLaw::Mixture {
                factors: factors.to_vec(),
                rest_weights,
                pick_weights,
            },
            domain: JointDomain { bands },
            decay: (
                DecayHint::from_rate(rate_rest),
                DecayHint::from_rate(rate_pick),
            ),
        })
    }

    pub fn domain(&self) -> &JointDomain {
        &self.domain
    }

    /// Decay hints along the `Z` and `Y` axes.
    pub fn decay(&self) -> (DecayHint, DecayHint) {
        self.decay
    }

    /// `E[exp(z1 Z + z2 Y)]`.
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        match &self.law {
            JointLaw::Independent { rest, pick } => rest.eval(z1) * pick.eval(z2),
            JointLaw::Mixture {
                factors,
                rest_weights,
                pick_weights,
            } => factors
                .iter()
                .zip(rest_weights.iter().zip(pick_weights))
                .filter(|(_, (&b, &a))| b != 0.0 || a != 0.0)
                .fold(Complex64::new(1.0, 0.0), |acc, (f, (&b, &a))| {
                    acc * f.eval(z1 * b + z2 * a)
                }),
        }
    }

    /// MGF of `Z + Y`, the whole portfolio.
    pub fn aggregate(&self) -> Result<MgfModel> {
        match &self.law {
            JointLaw::Independent { rest, pick } => {
                MgfModel::independent_sum(&[rest.clone(), pick.clone()])
            }
            JointLaw::Mixture {
                factors,
                rest_weights,
                pick_weights,
            } => {
                let w: Vec<f64> = rest_weights
                    .iter()
                    .zip(pick_weights)
                    .map(|(b, a)| b + a)
                    .collect();
                MgfModel::weighted_sum(&w, factors)
            }
        }
    }
}
