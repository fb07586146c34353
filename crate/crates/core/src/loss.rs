//! Loss functions inducing optimized certainty equivalents.
//!
//! Three families are supported: entropic, piecewise-linear (CV@R) and
//! polynomial. Besides values, one-sided derivatives and convex
//! conjugates, each family exposes the closed-form Fourier transforms of
//! its exponentially dampened pieces, which the engine combines with the
//! model MGF.
//!
//! Transform convention: `g^(z) = integral of exp(i z x) g(x) dx`, with
//! `z = u + iR`. A piece is finite only for `Im(z)` inside its validity
//! interval.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::mgf::AnalyticityStrip;

/// Side of a one-sided derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A loss function `l`: increasing, convex, `l(0) = 0`, `l(x) >= x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `(exp(gamma x) - 1) / gamma`.
    Entropic { gamma: f64 },
    /// `gamma2 x^+ - gamma1 (-x)^+` with `0 <= gamma1 < 1 < gamma2`.
    PiecewiseLinear { gamma1: f64, gamma2: f64 },
    /// `(((1 + x)^+)^gamma - 1) / gamma` for integer `gamma >= 2`.
    Polynomial { gamma: u32 },
}

impl LossSpec {
    pub fn entropic(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(RiskError::InvalidParameter(format!(
                "entropic loss requires gamma > 0, got {gamma}"
            )));
        }
        Ok(LossSpec::Entropic { gamma })
    }

    pub fn piecewise_linear(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !((0.0..1.0).contains(&gamma1) && gamma2 > 1.0 && gamma2.is_finite()) {
            return Err(RiskError::InvalidParameter(format!(
                "piecewise-linear loss requires 0 <= gamma1 < 1 < gamma2, got ({gamma1}, {gamma2})"
            )));
        }
        Ok(LossSpec::PiecewiseLinear { gamma1, gamma2 })
    }

    /// CV@R at level `lambda`: `gamma1 = 0`, `gamma2 = 1 / lambda`.
    pub fn cvar(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(RiskError::InvalidParameter(format!(
                "level must lie in (0, 1), got {lambda}"
            )));
        }
        Self::piecewise_linear(0.0, 1.0 / lambda)
    }

    pub fn polynomial(gamma: u32) -> Result<Self> {
        if gamma < 2 {
            return Err(RiskError::InvalidParameter(format!(
                "polynomial loss requires integer gamma >= 2, got {gamma}"
            )));
        }
        Ok(LossSpec::Polynomial { gamma })
    }

    /// Re-run the constructor checks, e.g. after deserialization.
    pub fn validated(self) -> Result<Self> {
        match self {
            LossSpec::Entropic { gamma } => Self::entropic(gamma),
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => Self::piecewise_linear(gamma1, gamma2),
            LossSpec::Polynomial { gamma } => Self::polynomial(gamma),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LossSpec::Entropic { gamma } => (gamma * x).exp_m1() / gamma,
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                if x > 0.0 {
                    gamma2 * x
                } else {
                    gamma1 * x
                }
            }
            LossSpec::Polynomial { gamma } => {
                let g = gamma as i32;
                ((1.0 + x).max(0.0).powi(g) - 1.0) / gamma as f64
            }
        }
    }

    pub fn deriv(&self, x: f64, side: Side) -> f64 {
        match *self {
            LossSpec::Entropic { gamma } => (gamma * x).exp(),
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                let upper = match side {
                    Side::Left => x > 0.0,
                    Side::Right => x >= 0.0,
                };
                if upper {
                    gamma2
                } else {
                    gamma1
                }
            }
            LossSpec::Polynomial { gamma } => (1.0 + x).max(0.0).powi(gamma as i32 - 1),
        }
    }

    /// `l*(y) = sup_x { x y - l(x) }`, `+inf` where unbounded.
    pub fn conjugate(&self, y: f64) -> f64 {
        match *self {
            LossSpec::Entropic { gamma } => {
                if y < 0.0 {
                    f64::INFINITY
                } else if y == 0.0 {
                    1.0 / gamma
                } else {
                    (y * y.ln() - (y - 1.0)) / gamma
                }
            }
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                if (gamma1..=gamma2).contains(&y) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            LossSpec::Polynomial { gamma } => {
                if y < 0.0 {
                    return f64::INFINITY;
                }
                let g = gamma as f64;
                // Maximizer x = y^(1/(g-1)) - 1.
                ((g - 1.0) * y.powf(g / (g - 1.0)) - g * y + 1.0) / g
            }
        }
    }

    /// Fourier pieces of `l`, such that
    /// `l(x) = constant + sum_k c_k psi_k(x + a_k)`.
    pub fn dampened_loss_transform(&self) -> Result<FourierDecomposition> {
        match *self {
            LossSpec::Entropic { .. } => Err(RiskError::ClosedFormPath),
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                let mut pieces = Vec::with_capacity(2);
                if gamma1 != 0.0 {
                    pieces.push(FourierPiece {
                        coefficient: -gamma1,
                        transform: DampenedTransform::new(PieceId::NegativePart),
                        shift: 0.0,
                    });
                }
                pieces.push(FourierPiece {
                    coefficient: gamma2,
                    transform: DampenedTransform::new(PieceId::PositivePart),
                    shift: 0.0,
                });
                Ok(FourierDecomposition {
                    pieces,
                    constant: 0.0,
                })
            }
            LossSpec::Polynomial { gamma } => Ok(FourierDecomposition {
                pieces: vec![FourierPiece {
                    coefficient: 1.0 / gamma as f64,
                    transform: DampenedTransform::new(PieceId::Power(gamma)),
                    shift: 1.0,
                }],
                constant: -1.0 / gamma as f64,
            }),
        }
    }

    /// Fourier pieces of `l'`; only the polynomial family is root-found.
    pub fn dampened_deriv_transform(&self) -> Result<FourierDecomposition> {
        match *self {
            LossSpec::Entropic { .. } => Err(RiskError::ClosedFormPath),
            LossSpec::PiecewiseLinear { .. } => Err(RiskError::QuantilePath),
            LossSpec::Polynomial { gamma } => Ok(FourierDecomposition {
                pieces: vec![FourierPiece {
                    coefficient: 1.0,
                    transform: DampenedTransform::new(PieceId::Power(gamma - 1)),
                    shift: 1.0,
                }],
                constant: 0.0,
            }),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            LossSpec::Entropic { .. } => "entropic",
            LossSpec::PiecewiseLinear { .. } => "piecewise_linear",
            LossSpec::Polynomial { .. } => "polynomial",
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossSpec::Entropic { gamma } => write!(f, "entropic({gamma})"),
            LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
                write!(f, "piecewise_linear({gamma1}, {gamma2})")
            }
            LossSpec::Polynomial { gamma } => write!(f, "polynomial({gamma})"),
        }
    }
}

/// Elementary functions whose dampened transforms are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceId {
    /// `(-x)^+`.
    NegativePart,
    /// `x^+`.
    PositivePart,
    /// `(x^+)^n`, `n >= 1`.
    Power(u32),
}

impl PieceId {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            PieceId::NegativePart => (-x).max(0.0),
            PieceId::PositivePart => x.max(0.0),
            PieceId::Power(n) => x.max(0.0).powi(n as i32),
        }
    }
}

/// Closed-form transform of one piece, with its open validity interval
/// for `Im(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampenedTransform {
    piece: PieceId,
    validity: (f64, f64),
}

impl DampenedTransform {
    pub fn new(piece: PieceId) -> Self {
        let validity = match piece {
            PieceId::NegativePart => (f64::NEG_INFINITY, 0.0),
            PieceId::PositivePart | PieceId::Power(_) => (0.0, f64::INFINITY),
        };
        Self { piece, validity }
    }

    pub fn piece(&self) -> PieceId {
        self.piece
    }

    pub fn validity(&self) -> (f64, f64) {
        self.validity
    }

    pub fn is_valid(&self, im: f64) -> bool {
        self.validity.0 < im && im < self.validity.1
    }

    /// Closed-form transform at `z`.
    pub fn fourier(&self, z: Complex64) -> Result<Complex64> {
        if !self.is_valid(z.im) {
            return Err(RiskError::OutsideValidity {
                im: z.im,
                lo: self.validity.0,
                hi: self.validity.1,
            });
        }
        Ok(self.fourier_unchecked(z))
    }

    /// Hot-loop variant; the caller has validated `Im(z)` once per line.
    #[inline]
    pub fn fourier_unchecked(&self, z: Complex64) -> Complex64 {
        match self.piece {
            PieceId::NegativePart | PieceId::PositivePart => -(z * z).inv(),
            PieceId::Power(n) => {
                let w = Complex64::i() / z;
                w.powu(n + 1) * factorial(n)
            }
        }
    }

    /// Dampening values `R` for which the piece is valid at `Im(z) = R`
    /// and `M(iu - R)` is finite, i.e. `-R` lies in the strip.
    pub fn admissible(&self, strip: &AnalyticityStrip) -> Option<(f64, f64)> {
        let lo = self.validity.0.max(-strip.hi());
        let hi = self.validity.1.min(-strip.lo());
        (lo < hi).then_some((lo, hi))
    }
}

/// One term `coefficient * psi(x + shift)` of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierPiece {
    pub coefficient: f64,
    pub transform: DampenedTransform,
    pub shift: f64,
}

impl FourierPiece {
    /// Transform of `x -> coefficient * psi(x + shift)` at `z`.
    pub fn fourier(&self, z: Complex64) -> Result<Complex64> {
        let base = self.transform.fourier(z)?;
        Ok(base * (-Complex64::i() * z * self.shift).exp() * self.coefficient)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficient * self.transform.piece().eval(x + self.shift)
    }
}

/// `l(x) = constant + sum of pieces`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDecomposition {
    pub pieces: Vec<FourierPiece>,
    pub constant: f64,
}

impl FourierDecomposition {
    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.pieces.iter().map(|p| p.eval(x)).sum::<f64>()
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn families() -> Vec<LossSpec> {
        vec![
            LossSpec::entropic(0.5).unwrap(),
            LossSpec::entropic(2.0).unwrap(),
            LossSpec::piecewise_linear(0.0, 20.0).unwrap(),
            LossSpec::piecewise_linear(0.3, 4.0).unwrap(),
            LossSpec::polynomial(2).unwrap(),
            LossSpec::polynomial(5).unwrap(),
        ]
    }

    #[test]
    fn values() {
        for l in families() {
            assert_eq!(l.eval(0.0), 0.0);
        }
        assert_eq!(
            LossSpec::piecewise_linear(0.0, 20.0).unwrap().eval(1.0),
            20.0
        );
        assert_eq!(LossSpec::polynomial(2).unwrap().eval(1.0), 1.5);
    }

    #[test]
    fn derivatives() {
        assert_eq!(LossSpec::entropic(3.0).unwrap().deriv(0.0, Side::Left), 1.0);
        let pl = LossSpec::piecewise_linear(0.0, 20.0).unwrap();
        assert_eq!(pl.deriv(0.0, Side::Left), 0.0);
        assert_eq!(pl.deriv(0.0, Side::Right), 20.0);
        assert_eq!(
            LossSpec::polynomial(2).unwrap().deriv(0.5, Side::Right),
            1.5
        );
        assert_eq!(
            LossSpec::polynomial(2).unwrap().deriv(-1.0, Side::Left),
            0.0
        );
    }

    #[test]
    fn conjugates() {
        let pl = LossSpec::piecewise_linear(0.2, 3.0).unwrap();
        assert_eq!(pl.conjugate(1.5), 0.0);
        assert_eq!(pl.conjugate(3.5), f64::INFINITY);
        assert_eq!(pl.conjugate(0.1), f64::INFINITY);
        assert_eq!(LossSpec::entropic(1.0).unwrap().conjugate(1.0), 0.0);
        assert_abs_diff_eq!(
            LossSpec::polynomial(2).unwrap().conjugate(2.0),
            0.5,
            epsilon = 1e-15
        );
        for l in families() {
            assert_abs_diff_eq!(l.conjugate(1.0), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(LossSpec::entropic(0.0).is_err());
        assert!(LossSpec::piecewise_linear(1.0, 2.0).is_err());
        assert!(LossSpec::piecewise_linear(0.0, 1.0).is_err());
        assert!(LossSpec::polynomial(1).is_err());
        assert!(LossSpec::cvar(1.0).is_err());
    }

    #[test]
    fn transform_values() {
        let pl = LossSpec::piecewise_linear(0.5, 20.0).unwrap();
        let d = pl.dampened_loss_transform().unwrap();
        let neg = d.pieces[0].transform;
        assert_eq!(neg.piece(), PieceId::NegativePart);
        let v = neg.fourier(Complex64::new(0.0, -1.0)).unwrap();
        assert_abs_diff_eq!((v - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        for p in &d.pieces {
            assert!(p.transform.fourier(Complex64::new(0.3, 0.0)).is_err());
        }

        let poly = LossSpec::polynomial(2).unwrap();
        let t = DampenedTransform::new(PieceId::Power(2));
        let v = t.fourier(Complex64::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!((v - Complex64::new(2.0, 0.0)).norm(), 0.0, epsilon = 1e-15);

        let dd = poly.dampened_deriv_transform().unwrap();
        let v = dd.pieces[0]
            .transform
            .fourier(Complex64::new(0.0, 1.0))
            .unwrap();
        assert_abs_diff_eq!((v - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);

        let p4 = LossSpec::polynomial(4)
            .unwrap()
            .dampened_deriv_transform()
            .unwrap();
        let v = p4.pieces[0]
            .transform
            .fourier(Complex64::new(0.0, 2.0))
            .unwrap();
        assert_abs_diff_eq!(
            (v - Complex64::new(6.0 / 16.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn routing_signals() {
        let e = LossSpec::entropic(1.0).unwrap();
        assert_eq!(e.dampened_loss_transform(), Err(RiskError::ClosedFormPath));
        assert_eq!(e.dampened_deriv_transform(), Err(RiskError::ClosedFormPath));
        let pl = LossSpec::cvar(0.05).unwrap();
        assert_eq!(pl.dampened_deriv_transform(), Err(RiskError::QuantilePath));
    }

    #[test]
    fn admissible_dampening() {
        let strip = AnalyticityStrip::new(-1.0, 2.0).unwrap();
        let pos = DampenedTransform::new(PieceId::PositivePart);
        assert_eq!(pos.admissible(&strip), Some((0.0, 1.0)));
        let neg = DampenedTransform::new(PieceId::NegativePart);
        assert_eq!(neg.admissible(&strip), Some((-2.0, 0.0)));
    }

    fn sup_grid(l: &LossSpec, y: f64) -> f64 {
        // Coarse scan then golden-section refinement of the concave objective.
        let obj = |x: f64| x * y - l.eval(x);
        let (a, b) = (-60.0, 20.0);
        let n = 8000;
        let h = (b - a) / n as f64;
        let best = (0..=n)
            .map(|k| a + k as f64 * h)
            .max_by(|p, q| obj(*p).total_cmp(&obj(*q)))
            .unwrap();
        let (mut lo, mut hi) = (best - h, best + h);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = hi - phi * (hi - lo);
            let d = lo + phi * (hi - lo);
            if obj(c) < obj(d) {
                lo = c;
            } else {
                hi = d;
            }
        }
        obj(0.5 * (lo + hi)).max(obj(a))
    }

    proptest! {
        #[test]
        fn loss_dominates_identity(x in -50.0f64..5.0) {
            for l in families() {
                prop_assert!(l.eval(x) >= x - 1e-12);
            }
        }

        #[test]
        fn loss_is_convex_and_nondecreasing(x in -5.0f64..3.0, h in 1e-3f64..0.5) {
            for l in families() {
                let (a, b, c) = (l.eval(x - h), l.eval(x), l.eval(x + h));
                prop_assert!(b >= a - 1e-12);
                prop_assert!(a + c - 2.0 * b >= -1e-9 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn difference_quotient_between_one_sided_derivatives(x in -3.0f64..2.0) {
            for l in families() {
                let h = 1e-7;
                let fwd = (l.eval(x + h) - l.eval(x)) / h;
                let right = l.deriv(x, Side::Right);
                let left = l.deriv(x, Side::Left);
                prop_assert!(fwd >= left - 1e-4 * (1.0 + left.abs()));
                prop_assert!(fwd <= l.deriv(x + h, Side::Right) + 1e-4 * (1.0 + right.abs()));
            }
        }

        #[test]
        fn conjugate_matches_numerical_supremum(t in 0.0f64..1.0) {
            for l in families() {
                let y = match l {
                    LossSpec::PiecewiseLinear { gamma1, gamma2 } => gamma1 + t * (gamma2 - gamma1),
                    _ => 0.05 + 2.5 * t,
                };
                let sup = sup_grid(&l, y);
                prop_assert!((l.conjugate(y) - sup).abs() < 1e-6, "{l} y={y}: {} vs {sup}", l.conjugate(y));
            }
        }

        #[test]
        fn decomposition_reproduces_loss(x in -5.0f64..5.0) {
            for l in families() {
                if let Ok(d) = l.dampened_loss_transform() {
                    prop_assert!((d.eval(x) - l.eval(x)).abs() < 1e-12 * (1.0 + l.eval(x).abs()));
                }
                if let Ok(d) = l.dampened_deriv_transform() {
                    let v = l.deriv(x, Side::Right);
                    prop_assert!((d.eval(x) - v).abs() < 1e-12 * (1.0 + v.abs()));
                }
            }
        }
    }
}
