//! Closed-form dampened transforms against direct numerical integration of
//! `integral of exp(i z x) psi(x) dx`.

use num_complex::Complex64;
use oce_fourier::loss::{DampenedTransform, PieceId};
use oce_fourier::numerics::{integrate_interval, QuadratureConfig};
use oce_fourier::LossSpec;

fn numerical_transform(psi: impl Fn(f64) -> f64, z: Complex64, a: f64, b: f64) -> Complex64 {
    let cfg = QuadratureConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_panels: 200_000,
        ..QuadratureConfig::default()
    };
    let f = |x: f64| (Complex64::i() * z * x).exp() * psi(x);
    integrate_interval(f, a, b, &cfg).unwrap().value
}

fn assert_close(a: Complex64, b: Complex64, tol: f64) {
    assert!((a - b).norm() <= tol * (1.0 + b.norm()), "{a} vs {b}");
}

#[test]
fn positive_part() {
    let t = DampenedTransform::new(PieceId::PositivePart);
    for (u, r) in [(0.0, 0.7), (1.3, 0.4), (-2.5, 1.1), (6.0, 2.0)] {
        let z = Complex64::new(u, r);
        // Integrand decays like exp(-R x); 60 / R leaves exp(-60).
        let num = numerical_transform(|x| x, z, 0.0, 60.0 / r);
        assert_close(t.fourier(z).unwrap(), num, 1e-9);
    }
}

#[test]
fn negative_part() {
    let t = DampenedTransform::new(PieceId::NegativePart);
    for (u, r) in [(0.0, -0.7), (1.3, -0.4), (-2.5, -1.1)] {
        let z = Complex64::new(u, r);
        let num = numerical_transform(|x| -x, z, 60.0 / r, 0.0);
        assert_close(t.fourier(z).unwrap(), num, 1e-9);
    }
}

#[test]
fn powers() {
    for n in 1..=5u32 {
        let t = DampenedTransform::new(PieceId::Power(n));
        for (u, r) in [(0.4, 1.5), (-3.0, 2.0)] {
            let z = Complex64::new(u, r);
            let num = numerical_transform(|x| x.powi(n as i32), z, 0.0, 80.0 / r);
            assert_close(t.fourier(z).unwrap(), num, 1e-8);
        }
    }
}

#[test]
fn invalid_dampening_is_rejected() {
    let pos = DampenedTransform::new(PieceId::PositivePart);
    let neg = DampenedTransform::new(PieceId::NegativePart);
    assert!(pos.fourier(Complex64::new(1.0, -0.5)).is_err());
    assert!(neg.fourier(Complex64::new(1.0, 0.5)).is_err());
    assert!(pos.fourier(Complex64::new(1.0, 0.0)).is_err());
}

#[test]
fn shifted_polynomial_piece() {
    // l(x) = ((1 + x)^+)^2 / 2 - 1/2 is supported on x > -1.
    let d = LossSpec::polynomial(2)
        .unwrap()
        .dampened_loss_transform()
        .unwrap();
    let piece = d.pieces[0];
    let z = Complex64::new(0.8, 1.2);
    let num = numerical_transform(|x| piece.eval(x), z, -1.0, 80.0);
    assert_close(piece.fourier(z).unwrap(), num, 1e-8);
}

#[test]
fn derivative_pieces_reproduce_the_derivative() {
    for gamma in 2..=5 {
        let loss = LossSpec::polynomial(gamma).unwrap();
        let d = loss.dampened_deriv_transform().unwrap();
        for x in [-2.0, -1.0, -0.3, 0.0, 0.7, 2.5] {
            let lhs = d.eval(x);
            let rhs = loss.deriv(x, oce_fourier::Side::Right);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
                "gamma {gamma} x {x}"
            );
        }
    }
}
