//! Brent's bracketing root finder with automatic bracket expansion.

use crate::error::{Result, RiskError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
    /// Geometric expansion steps tried when the bracket has no sign change.
    pub max_expansions: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            x_tol: 1e-10,
            f_tol: 1e-10,
            max_iter: 200,
            max_expansions: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub root: f64,
    pub f_residual: f64,
    pub iters: usize,
    /// Final bracket, `a <= root <= b` up to `x_tol`.
    pub bracket: (f64, f64),
}

/// Grow `[a, b]` geometrically, moving the end with the smaller `|f|`,
/// until `f(a) f(b) <= 0`.
pub fn expand_bracket<F>(
    f: &mut F,
    a: f64,
    b: f64,
    max_steps: usize,
) -> Result<(f64, f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    if a == b {
        b = a + 1.0_f64.max(a.abs() * 1e-3);
    }
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut steps = 0;
    while fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
        if steps == max_steps {
            return Err(RiskError::NoBracket { a, b });
        }
        let width = b - a;
        if fa.abs() < fb.abs() {
            a -= 1.6 * width;
            fa = f(a)?;
        } else {
            b += 1.6 * width;
            fb = f(b)?;
        }
        steps += 1;
    }
    Ok((a, fa, b, fb))
}

/// Find a root of `f` in `[a, b]`, expanding the bracket first if needed.
pub fn brent_root<F>(mut f: F, a: f64, b: f64, cfg: &RootConfig) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (a, fa, b, fb) = expand_bracket(&mut f, a, b, cfg.max_expansions)?;
    brent_bracketed(&mut f, a, fa, b, fb, cfg)
}

/// Brent's method on a bracket whose end values are already known.
pub fn brent_bracketed<F>(
    f: &mut F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    cfg: &RootConfig,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    if fa == 0.0 {
        return Ok(Root {
            root: a,
            f_residual: 0.0,
            iters: 0,
            bracket: (a, a),
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            root: b,
            f_residual: 0.0,
            iters: 0,
            bracket: (b, b),
        });
    }
    if fa.signum() == fb.signum() {
        return Err(RiskError::NoBracket { a, b });
    }
    // `b` is the best estimate, `c` the contrapoint.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * cfg.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= cfg.f_tol {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Ok(Root {
                root: b,
                f_residual: fb,
                iters: iter,
                bracket: (lo, hi),
            });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // Secant.
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // Inverse quadratic interpolation.
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(RiskError::MaxIterations(cfg.max_iter))
}
