//! Adaptive Gauss–Kronrod quadrature on the real line and the plane.
//!
//! Fourier integrands are integrated over a truncated window `[-U, U]`.
//! With a decay rate the window grows until an exponential tail bound is
//! below `abs_tol / 10`. Without one, the tails beyond `U` are mapped onto
//! `(0, 1]` and `U` is doubled until successive estimates agree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Result, RiskError};

/// Nested rule used on each panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PanelRule {
    /// 7-point Gauss with 15-point Kronrod extension.
    #[default]
    GaussKronrod15,
    /// 10-point Gauss with 21-point Kronrod extension.
    GaussKronrod21,
}

/// Truncation, tolerance and refinement policy for line and plane
/// integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_halfwidth: f64,
    pub max_doublings: u32,
    pub panel_rule: PanelRule,
    /// Panels in the first pass over `[-U, U]`; 0 is always a breakpoint.
    pub initial_panels: usize,
    /// Hard cap on panels per adaptive pass.
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            initial_halfwidth: 50.0,
            max_doublings: 12,
            panel_rule: PanelRule::default(),
            initial_panels: 64,
            max_panels: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol >= 0.0
            && self.initial_halfwidth > 0.0
            && self.initial_panels >= 2
            && self.max_panels >= self.initial_panels;
        if ok {
            Ok(())
        } else {
            Err(RiskError::InvalidParameter(format!(
                "invalid quadrature configuration {self:?}"
            )))
        }
    }
}

/// Value and error estimate of a line or plane integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub err_est: f64,
    /// Final truncation half-width (outer axis for plane integrals).
    pub halfwidth: f64,
    pub evaluations: usize,
}

struct Rule {
    xgk: &'static [f64],
    wgk: &'static [f64],
    wg: &'static [f64],
}

// Abscissae listed from the end point toward the centre; Gauss nodes sit at
// odd positions of `xgk`.
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG10: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

impl PanelRule {
    fn rule(&self) -> Rule {
        match self {
            PanelRule::GaussKronrod15 => Rule {
                xgk: &XGK15,
                wgk: &WGK15,
                wg: &WG7,
            },
            PanelRule::GaussKronrod21 => Rule {
                xgk: &XGK21,
                wgk: &WGK21,
                wg: &WG10,
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn checked<F: Fn(f64) -> Complex64>(f: &F, x: f64) -> Result<Complex64> {
    let v = f(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(RiskError::NonFinite(x))
    }
}

/// One Gauss–Kronrod pair on `[a, b]` with the QUADPACK error heuristic.
fn gk_panel<F: Fn(f64) -> Complex64>(f: &F, rule: &Rule, a: f64, b: f64) -> Result<Panel> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let n = rule.xgk.len();
    let centre_is_gauss = (n - 1) % 2 == 1;
    let fc = checked(f, centre)?;
    let mut kronrod = fc * rule.wgk[n - 1];
    let mut gauss = if centre_is_gauss {
        fc * rule.wg[rule.wg.len() - 1]
    } else {
        Complex64::new(0.0, 0.0)
    };
    let mut values = Vec::with_capacity(2 * n - 1);
    values.push((fc, rule.wgk[n - 1]));
    for j in 0..n - 1 {
        let dx = half * rule.xgk[j];
        let f1 = checked(f, centre - dx)?;
        let f2 = checked(f, centre + dx)?;
        kronrod += (f1 + f2) * rule.wgk[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * rule.wg[j / 2];
        }
        values.push((f1, rule.wgk[j]));
        values.push((f2, rule.wgk[j]));
    }
    let mean = kronrod * 0.5;
    let resabs: f64 = values.iter().map(|(v, w)| w * v.norm()).sum::<f64>() * half.abs();
    let resasc: f64 = values
        .iter()
        .map(|(v, w)| w * (v - mean).norm())
        .sum::<f64>()
        * half.abs();
    let value = kronrod * half;
    let mut err = ((kronrod - gauss) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    // Roundoff floor.
    err = err.max(50.0 * f64::EPSILON * resabs);
    Ok(Panel { a, b, value, err })
}

struct Adaptive {
    value: Complex64,
    err: f64,
    evaluations: usize,
}

/// Adaptive integration over `breaks` (sorted, at least two points).
fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    breaks: &[f64],
    tol: f64,
    cfg: &QuadratureConfig,
) -> Result<Adaptive> {
    let rule = cfg.panel_rule.rule();
    let per_panel = 2 * rule.xgk.len() - 1;
    let mut heap = BinaryHeap::with_capacity(2 * breaks.len());
    let mut err_total = 0.0;
    let mut value_total = Complex64::new(0.0, 0.0);
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        evaluations += per_panel;
        let p = gk_panel(f, &rule, w[0], w[1])?;
        err_total += p.err;
        value_total += p.value;
        heap.push(p);
    }
    let target = |v: Complex64| tol.max(cfg.rel_tol * v.norm());
    while err_total > target(value_total) {
        if heap.len() >= cfg.max_panels {
            return Err(RiskError::Quadrature(format!(
                "{} panels without reaching tolerance {:e} (error estimate {:e})",
                heap.len(),
                target(value_total),
                err_total
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel below floating-point resolution; keep its estimate.
            heap.push(worst);
            break;
        }
        let left = gk_panel(f, &rule, worst.a, mid)?;
        let right = gk_panel(f, &rule, mid, worst.b)?;
        evaluations += 2 * per_panel;
        err_total += left.err + right.err - worst.err;
        value_total += left.value + right.value - worst.value;
        heap.push(left);
        heap.push(right);
    }
    // Deterministic final sum in panel order.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let err = panels.iter().map(|p| p.err).sum();
    Ok(Adaptive {
        value,
        err,
        evaluations,
    })
}

fn symmetric_breaks(halfwidth: f64, panels: usize) -> Vec<f64> {
    let half = (panels / 2).max(1);
    let h = halfwidth / half as f64;
    (0..=2 * half)
        .map(|k| {
            if k == half {
                0.0
            } else {
                (k as f64 - half as f64) * h
            }
        })
        .collect()
}

/// Integrate a complex integrand over the real line.
///
/// `decay_rate`, when given, must bound `|f(u)|` by `C exp(-rate |u|)` for
/// large `|u|`.
pub fn integrate_line<F>(f: F, cfg: &QuadratureConfig, decay_rate: Option<f64>) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    cfg.validate()?;
    match decay_rate.filter(|r| *r > 0.0 && r.is_finite()) {
        Some(rate) => integrate_with_decay(&f, cfg, rate),
        None => integrate_by_doubling(&f, cfg),
    }
}

/// Integrate over the finite interval `[a, b]`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(RiskError::InvalidParameter(format!(
            "interval [{a}, {b}] must be finite"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            err_est: 0.0,
            halfwidth: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let n = (cfg.initial_panels / 4).max(1);
    let h = (hi - lo) / n as f64;
    let mut breaks: Vec<f64> = (0..n).map(|k| lo + k as f64 * h).collect();
    breaks.push(hi);
    let r = adaptive(&f, &breaks, cfg.abs_tol, cfg)?;
    Ok(Integral {
        value: r.value * sign,
        err_est: r.err,
        halfwidth: 0.5 * (hi - lo),
        evaluations: r.evaluations,
    })
}

const MAX_TAIL_STEPS: usize = 60;

fn integrate_with_decay<F: Fn(f64) -> Complex64>(
    f: &F,
    cfg: &QuadratureConfig,
    rate: f64,
) -> Result<Integral> {
    let goal = cfg.abs_tol / 10.0;
    let mut u = cfg.initial_halfwidth;
    let mut tail = f64::INFINITY;
    let mut probes = 0;
    for _ in 0..MAX_TAIL_STEPS {
        tail = (checked(f, u)?.norm() + checked(f, -u)?.norm()) / rate;
        probes += 2;
        if tail <= goal {
            break;
        }
        // Tail assumed exponential from here on; the step is at least 1/rate.
        let step = ((tail / goal).ln() / rate).max(1.0 / rate).min(1e3 * u);
        u += step;
    }
    if tail > goal {
        return Err(RiskError::Quadrature(format!(
            "tail bound {tail:e} above {goal:e} at half-width {u:e}"
        )));
    }
    let breaks = symmetric_breaks(u, cfg.initial_panels);
    let core = adaptive(f, &breaks, cfg.abs_tol - tail, cfg)?;
    Ok(Integral {
        value: core.value,
        err_est: core.err + tail,
        halfwidth: u,
        evaluations: core.evaluations + probes,
    })
}

/// Whole-line estimate for a fixed split point `u`, tails mapped by
/// `x = u / t`.
fn whole_line_estimate<F: Fn(f64) -> Complex64>(
    f: &F,
    cfg: &QuadratureConfig,
    u: f64,
    tol: f64,
) -> Result<Adaptive> {
    let core = adaptive(f, &symmetric_breaks(u, cfg.initial_panels), tol / 2.0, cfg)?;
    let mapped = |t: f64| {
        let x = u / t;
        (f(x) + f(-x)) * (u / (t * t))
    };
    let tails =
        adaptive(&mapped, &[0.0, 0.125, 0.25, 0.5, 1.0], tol / 2.0, cfg).map_err(|e| match e {
            // Only reachable when subdivision chases a non-decaying integrand
            // towards t = 0.
            RiskError::NonFinite(t) => RiskError::Quadrature(format!(
                "integrand does not decay: tail subdivision reached |u| = {:e}; \
             laws with atoms have non-decaying transforms",
                u / t
            )),
            e => e,
        })?;
    Ok(Adaptive {
        value: core.value + tails.value,
        err: core.err + tails.err,
        evaluations: core.evaluations + 2 * tails.evaluations,
    })
}

fn integrate_by_doubling<F: Fn(f64) -> Complex64>(
    f: &F,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    let tol = cfg.abs_tol / 2.0;
    let mut u = cfg.initial_halfwidth;
    let mut prev = whole_line_estimate(f, cfg, u, tol)?;
    let mut evaluations = prev.evaluations;
    for _ in 0..cfg.max_doublings {
        u *= 2.0;
        let next = whole_line_estimate(f, cfg, u, tol)?;
        evaluations += next.evaluations;
        let change = (next.value - prev.value).norm();
        if change < cfg.abs_tol {
            return Ok(Integral {
                value: next.value,
                err_est: next.err.max(change),
                halfwidth: u,
                evaluations,
            });
        }
        prev = next;
    }
    Err(RiskError::Quadrature(format!(
        "no agreement between successive doublings after {} steps (half-width {u:e})",
        cfg.max_doublings
    )))
}

/// Integrate over the plane as an outer line integral of inner line
/// integrals. The tolerance is split evenly (by a factor `sqrt 2`) between
/// the two axes; the reported error adds the outer estimate and the worst
/// inner estimate times the outer window length.
pub fn integrate_plane<F>(
    f: F,
    cfg: &QuadratureConfig,
    decay_rates: (Option<f64>, Option<f64>),
) -> Result<Integral>
where
    F: Fn(f64, f64) -> Complex64,
{
    cfg.validate()?;
    let split = cfg.abs_tol / std::f64::consts::SQRT_2;
    let inner_cfg = QuadratureConfig {
        abs_tol: split,
        ..*cfg
    };
    let outer_cfg = QuadratureConfig {
        abs_tol: split,
        ..*cfg
    };
    let worst_inner = std::cell::Cell::new(0.0f64);
    let inner_evals = std::cell::Cell::new(0usize);
    let failure = std::cell::RefCell::new(None);
    let outer = |u1: f64| -> Complex64 {
        match integrate_line(|u2| f(u1, u2), &inner_cfg, decay_rates.1) {
            Ok(r) => {
                worst_inner.set(worst_inner.get().max(r.err_est));
                inner_evals.set(inner_evals.get() + r.evaluations);
                r.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, f64::NAN)
            }
        }
    };
    let result = integrate_line(outer, &outer_cfg, decay_rates.0);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = result?;
    let window = 2.0 * r.halfwidth;
    Ok(Integral {
        value: r.value,
        err_est: r.err_est + worst_inner.get() * window,
        halfwidth: r.halfwidth,
        evaluations: inner_evals.get() + r.evaluations,
    })
}

/// Real part of a Fourier value after checking that the imaginary residue
/// is below `tolerance`.
pub fn real_part(value: Complex64, tolerance: f64) -> Result<f64> {
    if value.im.abs() > tolerance {
        return Err(RiskError::ImaginaryResidue {
            residue: value.im.abs(),
            tolerance,
        });
    }
    Ok(value.re)
}
