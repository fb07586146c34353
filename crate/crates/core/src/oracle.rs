//! Monte Carlo estimators used to cross-check the Fourier engine.
//!
//! Samples are drawn in fixed-size chunks, each with its own generator
//! seeded from the master seed by SplitMix64, so results do not depend on
//! the number of worker threads.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, RiskError};
use crate::loss::{LossSpec, Side};
use crate::mgf::{Law, MgfModel, NigParams};

const CHUNK: usize = 1 << 16;
const BOOTSTRAP_RESAMPLES: usize = 200;
const MIN_SAMPLES: usize = 10_000;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Minimizing allocation for OCE estimates, the quantile for V@R and
    /// CV@R.
    pub eta: f64,
}

impl McEstimate {
    /// Whether `x` lies within `k` standard errors of the estimate.
    pub fn covers(&self, x: f64, k: f64) -> bool {
        (x - self.value).abs() <= k * self.std_error
    }
}

/// SplitMix64 step, used to derive independent stream seeds.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chunk_seeds(seed: u64, chunks: usize) -> Vec<u64> {
    let mut state = seed;
    (0..chunks).map(|_| splitmix64(&mut state)).collect()
}

/// Inverse Gaussian variate with the given mean and shape, by the
/// transform-with-rejection method: with `y = N^2`,
/// `x = m + m^2 y / (2 s) - (m / (2 s)) sqrt(4 m s y + m^2 y^2)`;
/// return `x` with probability `m / (m + x)`, otherwise `m^2 / x`.
pub fn draw_inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, shape: f64) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    let y = n * n;
    let my = mean * y;
    let x = mean + mean * my / (2.0 * shape)
        - (mean / (2.0 * shape)) * (4.0 * shape * my + my * my).sqrt();
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

/// NIG variate as the normal variance-mean mixture
/// `mu + beta V + sqrt(V) Z`, `V ~ IG(delta / gamma, delta^2)`.
pub fn draw_nig<R: Rng + ?Sized>(rng: &mut R, p: &NigParams) -> f64 {
    let v = draw_inverse_gaussian(rng, p.delta / p.gamma(), p.delta * p.delta);
    let z: f64 = rng.sample(StandardNormal);
    p.mu + p.beta * v + v.sqrt() * z
}

/// One draw from the law behind an MGF model.
pub fn draw_model<R: Rng + ?Sized>(rng: &mut R, model: &MgfModel) -> f64 {
    match model.law() {
        Law::PointMass(m) => *m,
        Law::Nig(p) => draw_nig(rng, p),
        Law::Compound { pmf, claims } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut count = pmf.len() - 1;
            for (i, p) in pmf.iter().enumerate() {
                acc += p;
                if u < acc {
                    count = i;
                    break;
                }
            }
            let iid = claims.len() == 1;
            (0..count)
                .map(|j| draw_model(rng, if iid { &claims[0] } else { &claims[j] }))
                .sum()
        }
        Law::DefaultMixture { probs, exposures } => probs
            .iter()
            .zip(exposures)
            .map(|(&p, e)| {
                let u: f64 = rng.random();
                if u < p {
                    draw_model(rng, e)
                } else {
                    0.0
                }
            })
            .sum(),
        Law::LinearMixture { weights, factors } => weights
            .iter()
            .zip(factors)
            .map(|(&w, f)| w * draw_model(rng, f))
            .sum(),
    }
}

/// `n` draws of `draw`, chunked and seeded for thread-count independence.
pub fn sample_with<T, F>(n: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Copy + Default + Send,
    F: Fn(&mut StdRng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let seeds = chunk_seeds(seed, chunks);
    let mut out = vec![T::default(); n];
    out.par_chunks_mut(CHUNK)
        .zip(seeds.par_iter())
        .for_each(|(slot, &s)| {
            let mut rng = StdRng::seed_from_u64(s);
            for v in slot.iter_mut() {
                *v = draw(&mut rng);
            }
        });
    out
}

pub fn sample_nig(params: &NigParams, n: usize, seed: u64) -> Vec<f64> {
    sample_with(n, seed, |rng| draw_nig(rng, params))
}

pub fn sample_model(model: &MgfModel, n: usize, seed: u64) -> Vec<f64> {
    sample_with(n, seed, |rng| draw_model(rng, model))
}

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.len() < MIN_SAMPLES {
        return Err(RiskError::InvalidParameter(format!(
            "Monte Carlo estimators need at least {MIN_SAMPLES} samples, got {}",
            sample.len()
        )));
    }
    Ok(())
}

fn check_level(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(RiskError::InvalidParameter(format!(
            "level must lie in (0, 1), got {lambda}"
        )));
    }
    Ok(())
}

/// `k`-th smallest element (0-based).
fn order_statistic(sample: &[f64], k: usize) -> f64 {
    let mut work = sample.to_vec();
    let (_, v, _) = work.select_nth_unstable_by(k, f64::total_cmp);
    *v
}

/// Upper empirical quantile `x_(floor(n p) + 1)` with a standard error
/// from the spread of neighbouring order statistics,
/// `(x_(k + m) - x_(k - m)) / 2`, `m = sqrt(n p (1 - p))`.
fn empirical_quantile(sample: &[f64], p: f64) -> (f64, f64) {
    let n = sample.len();
    let k = ((n as f64 * p).floor() as usize).min(n - 1);
    let m = (n as f64 * p * (1.0 - p)).sqrt().ceil() as usize;
    let mut work = sample.to_vec();
    let (_, q, _) = work.select_nth_unstable_by(k, f64::total_cmp);
    let q = *q;
    let hi_idx = (k + m).min(n - 1);
    let lo_idx = k.saturating_sub(m);
    let hi = order_statistic(&work, hi_idx);
    let lo = order_statistic(&work, lo_idx);
    (q, 0.5 * (hi - lo))
}

/// `V@R_lambda = -q+(lambda)` from the empirical quantile.
pub fn mc_var(sample: &[f64], lambda: f64, seed: u64) -> Result<McEstimate> {
    check_sample(sample)?;
    check_level(lambda)?;
    let (q, se) = empirical_quantile(sample, lambda);
    Ok(McEstimate {
        value: -q,
        std_error: se,
        n_samples: sample.len(),
        seed,
        eta: q,
    })
}

/// Empirical CV@R `(1 / lambda) mean((q - X)^+) - q`, with standard error
/// `sd((q - X)^+) / (lambda sqrt n)`.
pub fn mc_cvar(sample: &[f64], lambda: f64, seed: u64) -> Result<McEstimate> {
    check_sample(sample)?;
    check_level(lambda)?;
    let (q, _) = empirical_quantile(sample, lambda);
    let (mean, sd) = mean_sd(sample.iter().map(|x| (q - x).max(0.0)));
    let n = sample.len() as f64;
    Ok(McEstimate {
        value: mean / lambda - q,
        std_error: sd / (lambda * n.sqrt()),
        n_samples: sample.len(),
        seed,
        eta: q,
    })
}

fn mean_sd<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    // Welford.
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Sample average of `l(eta - X) - eta`.
fn oce_objective(sample: &[f64], loss: &LossSpec, eta: f64) -> f64 {
    let s: f64 = sample.par_iter().map(|x| loss.eval(eta - x)).sum();
    s / sample.len() as f64 - eta
}

/// Minimizer of the empirical OCE objective: a 65-point grid over
/// `mean +/- 10 sd`, then golden-section search around the best point.
/// Entropic and piecewise-linear losses use their exact empirical
/// minimizers.
fn empirical_allocation(sample: &[f64], loss: &LossSpec) -> f64 {
    match *loss {
        LossSpec::Entropic { gamma } => {
            // Shift by the minimum for a stable log-mean-exp.
            let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
            let s: f64 = sample.par_iter().map(|x| (-gamma * (x - lo)).exp()).sum();
            lo - (s / sample.len() as f64).ln() / gamma
        }
        LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
            empirical_quantile(sample, (1.0 - gamma1) / (gamma2 - gamma1)).0
        }
        LossSpec::Polynomial { .. } => {
            let (mean, sd) = mean_sd(sample.iter().copied());
            let sd = if sd > 0.0 { sd } else { 1.0 };
            let grid = 64;
            let (a, b) = (mean - 10.0 * sd - 1.0, mean + 10.0 * sd);
            let h = (b - a) / grid as f64;
            let best = (0..=grid)
                .map(|k| a + k as f64 * h)
                .map(|eta| (eta, oce_objective(sample, loss, eta)))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .map(|(eta, _)| eta)
                .expect("grid is non-empty");
            golden_section(
                |eta| oce_objective(sample, loss, eta),
                best - h,
                best + h,
                1e-10,
            )
        }
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Empirical OCE `min over eta of mean(l(eta - X)) - eta`.
///
/// The standard error is a bootstrap over 200 resamples of the objective
/// at the fitted allocation; by the envelope argument, refitting the
/// allocation per resample changes the value only at second order.
pub fn mc_oce(sample: &[f64], loss: &LossSpec, seed: u64) -> Result<McEstimate> {
    check_sample(sample)?;
    let eta = empirical_allocation(sample, loss);
    let terms: Vec<f64> = sample
        .par_iter()
        .map(|x| loss.eval(eta - x) - eta)
        .collect();
    let n = terms.len();
    let value = terms.iter().sum::<f64>() / n as f64;
    let seeds = chunk_seeds(seed ^ 0xB007_57A9, BOOTSTRAP_RESAMPLES);
    let means: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = StdRng::seed_from_u64(s);
            (0..n).map(|_| terms[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    let (_, se) = mean_sd(means.into_iter());
    Ok(McEstimate {
        value,
        std_error: se,
        n_samples: n,
        seed,
        eta,
    })
}

/// `(1 / n) sum exp(u X_i)` with its standard error.
pub fn mc_mgf(sample: &[f64], u: f64, seed: u64) -> McEstimate {
    let (mean, sd) = mean_sd(sample.iter().map(|x| (u * x).exp()));
    McEstimate {
        value: mean,
        std_error: sd / (sample.len() as f64).sqrt(),
        n_samples: sample.len(),
        seed,
        eta: 0.0,
    }
}

/// Risk contribution `-E[Y l'(eta - X)]` from paired samples of the
/// portfolio `X` and the position `Y`, with bounds from the one-sided
/// derivatives. Returns `(value, lower, upper, std_error)`.
pub fn mc_contribution(
    portfolio: &[f64],
    position: &[f64],
    loss: &LossSpec,
    eta: f64,
) -> Result<(f64, f64, f64, f64)> {
    if portfolio.len() != position.len() {
        return Err(RiskError::InvalidParameter(format!(
            "{} portfolio samples but {} position samples",
            portfolio.len(),
            position.len()
        )));
    }
    check_sample(portfolio)?;
    let n = portfolio.len() as f64;
    let (mut lo_sum, mut mid_sum, mut hi_sum) = (0.0, 0.0, 0.0);
    let (_, sd) = mean_sd(portfolio.iter().zip(position).map(|(x, y)| {
        let left = -y * loss.deriv(eta - x, Side::Left);
        let right = -y * loss.deriv(eta - x, Side::Right);
        // Rounding is monotone, so equal-order sums keep lo <= mid <= hi.
        lo_sum += left.min(right);
        mid_sum += left;
        hi_sum += left.max(right);
        left
    }));
    Ok((mid_sum / n, lo_sum / n, hi_sum / n, sd / n.sqrt()))
}
