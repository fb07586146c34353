//! Risk measures from moment generating functions.
//!
//! Every OCE value is computed in two steps: a deterministic root search
//! for the optimal allocation `eta*`, then one Fourier integral for
//! `rho = E[l(eta* - X)] - eta*`. Both steps use the representation
//!
//! ```text
//! E[g(eta - X)] = (1 / 2 pi) * integral of exp(-i z eta) M(i z) g^(z) du,   z = u + iR,
//! ```
//!
//! which is valid whenever `Im(z) = R` lies in the validity interval of
//! `g^` and `-R` lies in the MGF strip.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, RiskError};
use crate::loss::{FourierDecomposition, LossSpec};
use crate::mgf::MgfModel;
use crate::numerics::{
    brent_root, gauss_legendre, integrate_interval, integrate_line, real_part, Integral,
    QuadratureConfig, RootConfig,
};

/// Probabilities within this distance of `[0, 1]` are clamped.
const PROBABILITY_SLACK: f64 = 1e-6;

/// Far-tail density values need many panels: the inversion integrand
/// oscillates with frequency `|x|` over a window of length `~1 / decay`.
const DENSITY_MAX_PANELS: usize = 1_000_000;

/// Dampening of the density inversion as a fraction of the strip edge.
const DENSITY_EDGE_FRACTION: f64 = 0.9;
const DENSITY_MAX_DAMPENING: f64 = 50.0;

/// Allocation, risk value and diagnostics of one risk computation.
///
/// V@R results reuse the type with `eta_star` the quantile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OceResult {
    pub eta_star: f64,
    pub rho: f64,
    /// `|E[l'(eta* - X)] - 1|`, or the CDF mismatch at the quantile level.
    pub foc_residual: f64,
    pub quad_err: f64,
    pub root_iters: usize,
    pub method_tag: String,
    /// Set when the method is known to be unreliable for the model.
    pub caution: Option<String>,
}

/// Dampening overrides; `None` picks the engine default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dampening {
    /// For the CDF (sign selects direct or complementary form) and for the
    /// polynomial integrals (must be positive).
    pub r: Option<f64>,
    /// CV@R piece `(-x)^+`, negative.
    pub r1: Option<f64>,
    /// CV@R piece `x^+`, positive.
    pub r2: Option<f64>,
}

impl Dampening {
    pub fn single(r: f64) -> Self {
        Self {
            r: Some(r),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfEstimate {
    pub probability: f64,
    pub err_est: f64,
    pub dampening: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEstimate {
    pub x: f64,
    /// `F(x) - p` at the returned point.
    pub residual: f64,
    pub iters: usize,
    pub quad_err: f64,
}

/// Polynomial allocation with the diagnostics of its root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub eta_star: f64,
    pub foc_residual: f64,
    pub iters: usize,
    pub quad_err: f64,
    pub dampening: f64,
}

/// A fully specified risk computation.
#[derive(Debug, Clone)]
pub struct RiskQuery {
    pub model: MgfModel,
    pub loss: LossSpec,
    pub dampening: Dampening,
    pub quadrature: QuadratureConfig,
    pub root: RootConfig,
}

impl RiskQuery {
    pub fn new(model: MgfModel, loss: LossSpec) -> Self {
        Self {
            model,
            loss,
            dampening: Dampening::default(),
            quadrature: QuadratureConfig::default(),
            root: RootConfig::default(),
        }
    }

    /// CV@R at level `lambda`.
    pub fn cvar(model: MgfModel, lambda: f64) -> Result<Self> {
        Ok(Self::new(model, LossSpec::cvar(lambda)?))
    }

    pub fn evaluate(&self) -> Result<OceResult> {
        let engine = Engine {
            quadrature: self.quadrature,
            root: self.root,
            ..Engine::default()
        };
        engine.oce_damped(&self.model, &self.loss, self.dampening)
    }
}

/// Numerical configuration shared by all engine operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    pub quadrature: QuadratureConfig,
    pub root: RootConfig,
    /// Gauss–Legendre nodes of the quantile-averaging CV@R baseline.
    pub cvar_grid: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            root: RootConfig::default(),
            cvar_grid: 64,
        }
    }
}

impl Engine {
    /// `(1 / 2 pi) * integral of exp(-i z eta) M(i z) kernel(z) du` along
    /// `Im(z) = r`.
    fn fourier_line<K>(&self, model: &MgfModel, r: f64, eta: f64, kernel: K) -> Result<Integral>
    where
        K: Fn(Complex64) -> Complex64,
    {
        let strip = model.strip();
        if !strip.contains(-r) {
            return Err(RiskError::Dampening {
                r,
                lo: -strip.hi(),
                hi: -strip.lo(),
            });
        }
        let integrand = |u: f64| {
            let z = Complex64::new(u, r);
            let iz = Complex64::new(-r, u);
            (-iz * eta).exp() * model.eval(iz) * kernel(z)
        };
        let mut out = integrate_line(integrand, &self.quadrature, model.decay().rate())?;
        out.value /= 2.0 * PI;
        out.err_est /= 2.0 * PI;
        Ok(out)
    }

    /// `E[g(eta - X)]` for `g` given by its Fourier pieces, with one
    /// dampening value per piece.
    fn expectation(
        &self,
        model: &MgfModel,
        decomposition: &FourierDecomposition,
        dampening: &[f64],
        eta: f64,
    ) -> Result<(f64, f64)> {
        let mut value = decomposition.constant;
        let mut err = 0.0;
        for (piece, &r) in decomposition.pieces.iter().zip(dampening) {
            let t = piece.transform;
            if !t.is_valid(r) {
                let (lo, hi) = t.validity();
                return Err(RiskError::OutsideValidity { im: r, lo, hi });
            }
            let shift = piece.shift;
            let kernel =
                |z: Complex64| t.fourier_unchecked(z) * (-Complex64::i() * z * shift).exp();
            let line = self.fourier_line(model, r, eta, kernel)?;
            let scale = piece.coefficient.abs();
            value += piece.coefficient * real_part(line.value, self.residue_tol(line.err_est))?;
            err += scale * line.err_est;
        }
        Ok((value, err))
    }

    fn residue_tol(&self, err_est: f64) -> f64 {
        (10.0 * self.quadrature.abs_tol).max(10.0 * err_est)
    }

    /// Default dampening of the direct (`R > 0`) CDF form and of the
    /// `x^+` CV@R piece: half the distance to the lower strip edge, capped
    /// at one over the standard deviation.
    fn default_positive_r(model: &MgfModel) -> f64 {
        let std = model.moments().std;
        let cap = if std > 0.0 { 1.0 / std } else { f64::INFINITY };
        (-model.strip().lo() / 2.0).min(cap).min(1e6)
    }

    fn default_negative_r(model: &MgfModel) -> f64 {
        let std = model.moments().std;
        let cap = if std > 0.0 { 1.0 / std } else { f64::INFINITY };
        -(model.strip().hi() / 2.0).min(cap).min(1e6)
    }

    /// Default dampening of the polynomial integrals. A smaller `R`
    /// avoids cancellation between the large prefactor `exp(R (1 + eta))`
    /// and the oscillating integral.
    fn default_poly_r(model: &MgfModel, gamma: u32) -> f64 {
        let m = model.moments();
        (-model.strip().lo() / 2.0).min(gamma as f64 / (1.0 + m.mean.abs() + m.std))
    }

    fn require_zero_inside(model: &MgfModel) -> Result<()> {
        if model.strip().contains_zero() {
            Ok(())
        } else {
            Err(RiskError::EmptyStrip(format!(
                "strip {} does not contain 0",
                model.strip()
            )))
        }
    }

    /// `P(X <= x)` by Fourier inversion.
    ///
    /// With `R > 0` the integral itself is the CDF; with `R < 0` the
    /// contour crosses the pole at 0 and the CDF is one plus the integral.
    /// By default the direct form is used left of the mean and the
    /// complementary form right of it, which keeps `exp(R x)` small.
    pub fn cdf_fourier(&self, model: &MgfModel, x: f64, r: Option<f64>) -> Result<CdfEstimate> {
        Self::require_zero_inside(model)?;
        let r = match r {
            Some(r) => r,
            None if x <= model.moments().mean => Self::default_positive_r(model),
            None => Self::default_negative_r(model),
        };
        if r.abs() < 1e-6 {
            return Err(RiskError::Dampening {
                r,
                lo: -model.strip().hi(),
                hi: -model.strip().lo(),
            });
        }
        let line = self.fourier_line(model, r, x, |z| Complex64::i() / z)?;
        let integral = real_part(line.value, self.residue_tol(line.err_est))?;
        let p = if r > 0.0 { integral } else { 1.0 + integral };
        if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
            return Err(RiskError::ProbabilityOutOfRange(p));
        }
        Ok(CdfEstimate {
            probability: p.clamp(0.0, 1.0),
            err_est: line.err_est,
            dampening: r,
        })
    }

    /// Upper quantile `inf { x : F(x) > p }`, found by Brent's method on
    /// the Fourier CDF starting from `mean +/- 2 std`.
    pub fn quantile(&self, model: &MgfModel, p: f64) -> Result<QuantileEstimate> {
        self.quantile_damped(model, p, None)
    }

    /// [`quantile`](Self::quantile) with one CDF dampening `r` for every
    /// probe point instead of the side-dependent default.
    pub fn quantile_damped(
        &self,
        model: &MgfModel,
        p: f64,
        r: Option<f64>,
    ) -> Result<QuantileEstimate> {
        if !(p > 0.0 && p < 1.0) {
            return Err(RiskError::InvalidParameter(format!(
                "probability level must lie in (0, 1), got {p}"
            )));
        }
        Self::require_zero_inside(model)?;
        let m = model.moments();
        let spread = if m.std > 0.0 { 2.0 * m.std } else { 1.0 };
        let mut quad_err: f64 = 0.0;
        let root = brent_root(
            |x| {
                let c = self.cdf_fourier(model, x, r)?;
                quad_err = quad_err.max(c.err_est);
                Ok(c.probability - p)
            },
            m.mean - spread,
            m.mean + spread,
            &self.root,
        )?;
        Ok(QuantileEstimate {
            x: root.root,
            residual: root.f_residual,
            iters: root.iters,
            quad_err,
        })
    }

    /// `V@R_lambda(X) = -q+(lambda)`.
    pub fn value_at_risk(&self, model: &MgfModel, lambda: f64) -> Result<OceResult> {
        self.value_at_risk_damped(model, lambda, None)
    }

    pub fn value_at_risk_damped(
        &self,
        model: &MgfModel,
        lambda: f64,
        r: Option<f64>,
    ) -> Result<OceResult> {
        let q = self.quantile_damped(model, lambda, r)?;
        Ok(OceResult {
            eta_star: q.x,
            rho: -q.x,
            foc_residual: q.residual.abs(),
            quad_err: q.quad_err,
            root_iters: q.iters,
            method_tag: "fourier-cdf".into(),
            caution: None,
        })
    }

    /// Closed form `rho = ln M(-gamma) / gamma`, `eta* = -rho`.
    pub fn entropic_risk(&self, model: &MgfModel, gamma: f64) -> Result<OceResult> {
        LossSpec::entropic(gamma)?;
        if !model.strip().contains(-gamma) {
            return Err(RiskError::Dampening {
                r: -gamma,
                lo: model.strip().lo(),
                hi: model.strip().hi(),
            });
        }
        let rho = model.eval_real(-gamma).ln() / gamma;
        Ok(OceResult {
            eta_star: -rho,
            rho,
            foc_residual: 0.0,
            quad_err: 0.0,
            root_iters: 0,
            method_tag: "closed-form".into(),
            caution: None,
        })
    }

    /// CV@R-type allocation `q+((1 - gamma1) / (gamma2 - gamma1))`.
    pub fn cvar_allocation(
        &self,
        model: &MgfModel,
        gamma1: f64,
        gamma2: f64,
    ) -> Result<QuantileEstimate> {
        LossSpec::piecewise_linear(gamma1, gamma2)?;
        self.quantile(model, (1.0 - gamma1) / (gamma2 - gamma1))
    }

    /// OCE of the piecewise-linear loss by the two-term Fourier formula.
    ///
    /// Overrides in `damp.r1` / `damp.r2` only affect the value step; the
    /// allocation always uses the default CDF dampening.
    pub fn cvar_fourier(
        &self,
        model: &MgfModel,
        gamma1: f64,
        gamma2: f64,
        damp: Dampening,
    ) -> Result<OceResult> {
        let loss = LossSpec::piecewise_linear(gamma1, gamma2)?;
        let q = self.cvar_allocation(model, gamma1, gamma2)?;
        let decomposition = loss.dampened_loss_transform()?;
        let r1 = damp.r1.unwrap_or_else(|| Self::default_negative_r(model));
        let r2 = damp.r2.unwrap_or_else(|| Self::default_positive_r(model));
        let rs: Vec<f64> = decomposition
            .pieces
            .iter()
            .map(|p| {
                if p.transform.validity().1 <= 0.0 {
                    r1
                } else {
                    r2
                }
            })
            .collect();
        let (expected, err) = self.expectation(model, &decomposition, &rs, q.x)?;
        Ok(OceResult {
            eta_star: q.x,
            rho: expected - q.x,
            foc_residual: q.residual.abs(),
            quad_err: err + q.quad_err,
            root_iters: q.iters,
            method_tag: "fourier".into(),
            caution: None,
        })
    }

    /// CV@R at level `lambda` by the Fourier formula.
    pub fn cvar(&self, model: &MgfModel, lambda: f64) -> Result<OceResult> {
        self.cvar_fourier(model, 0.0, 1.0 / lambda, Dampening::default())
    }

    /// Baseline `CV@R = -(1 / lambda) * integral over (0, lambda] of q+(s) ds`
    /// with an open Gauss–Legendre rule, one quantile search per node.
    pub fn cvar_standard(&self, model: &MgfModel, lambda: f64, grid: usize) -> Result<OceResult> {
        LossSpec::cvar(lambda)?;
        if grid == 0 {
            return Err(RiskError::InvalidParameter(
                "grid size must be positive".into(),
            ));
        }
        let (nodes, weights) = gauss_legendre(grid);
        let mut integral = 0.0;
        let mut iters = 0;
        let mut quad_err: f64 = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let s = 0.5 * lambda * (1.0 + x);
            let q = self.quantile(model, s)?;
            integral += 0.5 * w * q.x;
            iters += q.iters;
            quad_err = quad_err.max(q.quad_err);
        }
        let eta = self.quantile(model, lambda)?;
        Ok(OceResult {
            eta_star: eta.x,
            rho: -integral,
            foc_residual: eta.residual.abs(),
            quad_err,
            root_iters: iters + eta.iters,
            method_tag: format!("standard-gl{grid}"),
            caution: None,
        })
    }

    /// Density by Fourier inversion along `Im(z) = R`,
    /// `f(x) = exp(R x) / pi * integral over u > 0 of Re[exp(-iux) M(iu - R)] du`,
    /// using Hermitian symmetry. The dampening is chosen on the side of
    /// the mean where `x` lies, so far-tail values only need the accuracy
    /// `abs_tol * exp(-R x)` from the integral.
    pub fn density(&self, model: &MgfModel, x: f64) -> Result<(f64, f64)> {
        let strip = model.strip();
        let r = if x <= model.moments().mean {
            (-DENSITY_EDGE_FRACTION * strip.lo()).min(DENSITY_MAX_DAMPENING)
        } else {
            (-DENSITY_EDGE_FRACTION * strip.hi()).max(-DENSITY_MAX_DAMPENING)
        };
        let weight = (r * x).exp();
        let cfg = QuadratureConfig {
            abs_tol: PI * self.quadrature.abs_tol / weight,
            max_panels: self.quadrature.max_panels.max(DENSITY_MAX_PANELS),
            ..self.quadrature
        };
        let integrand = |u: f64| {
            if u <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let iz = Complex64::new(-r, u);
            Complex64::new((Complex64::new(0.0, -u * x).exp() * model.eval(iz)).re, 0.0)
        };
        let out = integrate_line(integrand, &cfg, model.decay().rate())?;
        Ok((weight * out.value.re / PI, weight * out.err_est / PI))
    }

    /// CV@R by integrating the Fourier-inverted density against the tail
    /// payoff, `(1 / lambda) * E[(eta* - X)^+] - eta*`. Reference method;
    /// unreliable for sharply peaked densities.
    ///
    /// The payoff integral runs over `[x0, eta*]`, where the Chernoff bound
    /// `E[(eta - X)^+ ; X < x0] <= M(-R) exp(R x0) (1 / R + eta - x0)`
    /// drops below a tenth of the tolerance.
    pub fn cvar_density(&self, model: &MgfModel, lambda: f64) -> Result<OceResult> {
        LossSpec::cvar(lambda)?;
        let q = self.quantile(model, lambda)?;
        let eta = q.x;
        let m = model.moments();
        let tol = self.quadrature.abs_tol;
        let r = (-DENSITY_EDGE_FRACTION * model.strip().lo()).min(DENSITY_MAX_DAMPENING);
        let mgf = model.eval_real(-r);
        let bound = |x0: f64| mgf * (r * x0).exp() * (1.0 / r + eta - x0);
        let scale = if m.std > 0.0 { m.std } else { 1.0 };
        let mut x0 = eta - scale;
        let mut steps = 0;
        while bound(x0) > tol / 10.0 {
            x0 -= scale.max(eta - x0);
            steps += 1;
            if steps > 200 {
                return Err(RiskError::Quadrature(format!(
                    "no tail cut-off found for the density method (bound {:e})",
                    bound(x0)
                )));
            }
        }
        let length = eta - x0;
        let inner = Engine {
            quadrature: self.quadrature.with_abs_tol(tol / (length * length)),
            ..*self
        };
        let failure = std::cell::RefCell::new(None);
        let integrand = |x: f64| match inner.density(model, x) {
            Ok((f, _)) => Complex64::new((eta - x) * f, 0.0),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        };
        let outer_cfg = self.quadrature.with_abs_tol(tol / 2.0);
        let result = integrate_interval(integrand, x0, eta, &outer_cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let out = result?;
        let caution = (m.std < 0.1)
            .then(|| "density inversion is unreliable for sharply peaked densities".to_string());
        let err = out.err_est + tol / 2.0 + bound(x0);
        Ok(OceResult {
            eta_star: eta,
            rho: out.value.re / lambda - eta,
            foc_residual: q.residual.abs(),
            quad_err: err / lambda + q.quad_err,
            root_iters: q.iters,
            method_tag: "density".into(),
            caution,
        })
    }

    fn poly_dampening(model: &MgfModel, gamma: u32, r: Option<f64>) -> f64 {
        r.unwrap_or_else(|| Self::default_poly_r(model, gamma))
    }

    /// `f(eta) = E[l'(eta - X)] - 1` for the polynomial loss.
    pub fn poly_foc(
        &self,
        model: &MgfModel,
        gamma: u32,
        eta: f64,
        r: Option<f64>,
    ) -> Result<(f64, f64)> {
        let loss = LossSpec::polynomial(gamma)?;
        let d = loss.dampened_deriv_transform()?;
        let r = Self::poly_dampening(model, gamma, r);
        let (e, err) = self.expectation(model, &d, &[r], eta)?;
        Ok((e - 1.0, err))
    }

    /// Root of the polynomial first-order condition.
    pub fn poly_allocation(
        &self,
        model: &MgfModel,
        gamma: u32,
        r: Option<f64>,
    ) -> Result<Allocation> {
        LossSpec::polynomial(gamma)?;
        Self::require_zero_inside(model)?;
        let m = model.moments();
        let r = Self::poly_dampening(model, gamma, r);
        let mut quad_err: f64 = 0.0;
        let root = brent_root(
            |eta| {
                let (f, err) = self.poly_foc(model, gamma, eta, Some(r))?;
                quad_err = quad_err.max(err);
                Ok(f)
            },
            m.mean - 6.0 * m.std - 1.0,
            m.mean + 1.0,
            &self.root,
        )?;
        Ok(Allocation {
            eta_star: root.root,
            foc_residual: root.f_residual.abs(),
            iters: root.iters,
            quad_err,
            dampening: r,
        })
    }

    /// Polynomial OCE: allocation root, then one Fourier integral.
    pub fn poly_oce(&self, model: &MgfModel, gamma: u32, r: Option<f64>) -> Result<OceResult> {
        let loss = LossSpec::polynomial(gamma)?;
        let a = self.poly_allocation(model, gamma, r)?;
        let d = loss.dampened_loss_transform()?;
        let (e, err) = self.expectation(model, &d, &[a.dampening], a.eta_star)?;
        Ok(OceResult {
            eta_star: a.eta_star,
            rho: e - a.eta_star,
            foc_residual: a.foc_residual,
            quad_err: err + a.quad_err,
            root_iters: a.iters,
            method_tag: "fourier".into(),
            caution: None,
        })
    }

    /// Dispatch on the loss family with default dampening.
    pub fn oce(&self, model: &MgfModel, loss: &LossSpec) -> Result<OceResult> {
        self.oce_damped(model, loss, Dampening::default())
    }

    pub fn oce_damped(
        &self,
        model: &MgfModel,
        loss: &LossSpec,
        damp: Dampening,
    ) -> Result<OceResult> {
        match *loss {
            LossSpec::Entropic { gamma } => self.entropic_risk(model, gamma),
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                self.cvar_fourier(model, gamma1, gamma2, damp)
            }
            LossSpec::Polynomial { gamma } => self.poly_oce(model, gamma, damp.r),
        }
    }

    /// `E[l'(eta - X)]` on the side that the allocation condition uses, for
    /// diagnostics.
    pub fn expected_derivative(&self, model: &MgfModel, loss: &LossSpec, eta: f64) -> Result<f64> {
        match *loss {
            LossSpec::Entropic { gamma } => Ok((gamma * eta).exp() * model.eval_real(-gamma)),
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                // P(X < eta) gamma2 + P(X >= eta) gamma1 for continuous X.
                let p = self.cdf_fourier(model, eta, None)?.probability;
                Ok(gamma2 * p + gamma1 * (1.0 - p))
            }
            LossSpec::Polynomial { gamma } => Ok(self.poly_foc(model, gamma, eta, None)?.0 + 1.0),
        }
    }
}

/// Median wall time in milliseconds of `reps` runs after one warm-up.
pub fn median_wall_time_ms<T, E, F>(reps: usize, mut f: F) -> std::result::Result<(T, f64), E>
where
    F: FnMut() -> std::result::Result<T, E>,
{
    let mut out = f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        out = f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let median = if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    };
    Ok((out, median))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mgf::nig_reference_sets;
    use approx::assert_abs_diff_eq;

    fn nig(i: usize) -> MgfModel {
        MgfModel::from_nig(nig_reference_sets()[i])
    }

    #[test]
    fn symmetric_cdf_at_zero() {
        let e = Engine::default();
        let c = e.cdf_fourier(&nig(3), 0.0, None).unwrap();
        assert_abs_diff_eq!(c.probability, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn cdf_far_right_is_one() {
        let e = Engine::default();
        let m = nig(3).moments();
        let c = e.cdf_fourier(&nig(3), m.mean + 40.0 * m.std, None).unwrap();
        assert_abs_diff_eq!(c.probability, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn cdf_forms_agree() {
        let e = Engine::default();
        for x in [-1.0, 0.3, 2.0] {
            let a = e.cdf_fourier(&nig(3), x, Some(0.4)).unwrap().probability;
            let b = e.cdf_fourier(&nig(3), x, Some(-0.4)).unwrap().probability;
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn inadmissible_dampening_rejected() {
        let e = Engine::default();
        assert!(matches!(
            e.cdf_fourier(&nig(3), 0.0, Some(1.5)),
            Err(RiskError::Dampening { .. })
        ));
        assert!(e.cdf_fourier(&nig(3), 0.0, Some(0.0)).is_err());
    }

    #[test]
    fn median_of_symmetric_model() {
        let e = Engine::default();
        let q = e.quantile(&nig(3), 0.5).unwrap();
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(
            e.value_at_risk(&nig(3), 0.5).unwrap().rho,
            0.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn entropic_closed_forms() {
        let e = Engine::default();
        let r = e.entropic_risk(&nig(3), 0.5).unwrap();
        assert_abs_diff_eq!(r.rho, 2.0 * (1.0 - 0.75f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(r.rho, 0.267_949_2, epsilon = 1e-7);
        let pm = e.entropic_risk(&MgfModel::point_mass(0.7), 3.0).unwrap();
        assert_abs_diff_eq!(pm.rho, -0.7, epsilon = 1e-14);
        let low = e.entropic_risk(&nig(3), 0.25).unwrap();
        assert!(low.rho <= r.rho);
        assert!(e.entropic_risk(&nig(3), 1.5).is_err());
    }

    #[test]
    fn cvar_allocation_is_quantile() {
        let e = Engine::default();
        let q = e.cvar_allocation(&nig(3), 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn cvar_dominates_var() {
        let e = Engine::default();
        let v = e.value_at_risk(&nig(3), 0.05).unwrap();
        let c = e.cvar(&nig(3), 0.05).unwrap();
        assert!(c.rho >= v.rho);
        assert_abs_diff_eq!(c.eta_star, v.eta_star, epsilon = 1e-12);
    }

    #[test]
    fn cvar_single_node_lies_between_var_and_cvar() {
        let e = Engine::default();
        let v = e.value_at_risk(&nig(3), 0.05).unwrap().rho;
        let c = e.cvar(&nig(3), 0.05).unwrap().rho;
        let one = e.cvar_standard(&nig(3), 0.05, 1).unwrap().rho;
        assert!(v < one && one < c, "{v} {one} {c}");
    }

    #[test]
    fn poly_foc_is_monotone_around_root() {
        let e = Engine::default();
        let a = e.poly_allocation(&nig(3), 2, None).unwrap();
        let (lo, _) = e.poly_foc(&nig(3), 2, a.eta_star - 0.1, None).unwrap();
        let (hi, _) = e.poly_foc(&nig(3), 2, a.eta_star + 0.1, None).unwrap();
        assert!(lo < 0.0 && 0.0 < hi);
    }

    #[test]
    fn dispatcher_is_identity() {
        let e = Engine::default();
        let m = nig(3);
        let pairs = [
            (
                LossSpec::entropic(0.5).unwrap(),
                e.entropic_risk(&m, 0.5).unwrap(),
            ),
            (LossSpec::cvar(0.05).unwrap(), e.cvar(&m, 0.05).unwrap()),
            (
                LossSpec::polynomial(2).unwrap(),
                e.poly_oce(&m, 2, None).unwrap(),
            ),
        ];
        for (loss, direct) in pairs {
            assert_eq!(e.oce(&m, &loss).unwrap(), direct);
        }
    }

    #[test]
    fn expected_derivative_is_one_at_allocation() {
        let e = Engine::default();
        let m = nig(3);
        for loss in [
            LossSpec::entropic(0.5).unwrap(),
            LossSpec::polynomial(3).unwrap(),
        ] {
            let r = e.oce(&m, &loss).unwrap();
            assert_abs_diff_eq!(
                e.expected_derivative(&m, &loss, r.eta_star).unwrap(),
                1.0,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn median_timer_returns_last_value() {
        let mut k = 0;
        let (v, t) = median_wall_time_ms(5, || {
            k += 1;
            Ok::<_, RiskError>(k)
        })
        .unwrap();
        assert_eq!(v, 6);
        assert!(t >= 0.0);
    }
}
