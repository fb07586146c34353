//! Risk-measure axioms on randomly drawn NIG laws.

use oce_fourier::{Engine, LossSpec, MgfModel, NigParams};
use proptest::prelude::*;

fn nig() -> impl Strategy<Value = NigParams> {
    (0.5f64..10.0, -0.7f64..0.7, 0.05f64..3.0, -1.0f64..1.0)
        .prop_map(|(a, t, d, m)| NigParams::new(a, a * t, d, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cvar_axioms(p in nig(), shift in -2.0f64..2.0, scale in 0.2f64..4.0) {
        let e = Engine::default();
        let m = MgfModel::from_nig(p);
        let c5 = e.cvar(&m, 0.05).unwrap();
        let c1 = e.cvar(&m, 0.01).unwrap();
        let v5 = e.value_at_risk(&m, 0.05).unwrap();
        let v1 = e.value_at_risk(&m, 0.01).unwrap();
        prop_assert!(c5.rho >= v5.rho && c1.rho >= v1.rho);
        prop_assert!(c1.rho >= c5.rho && v1.rho >= v5.rho);
        prop_assert!(c5.rho >= -p.mean());
        prop_assert!(c5.foc_residual <= 1e-8);

        let moved = e.cvar(&MgfModel::from_nig(p.shifted(shift)), 0.05).unwrap();
        prop_assert!((moved.rho - (c5.rho - shift)).abs() <= 1e-7 * (1.0 + c5.rho.abs()));

        let big = e.cvar(&MgfModel::from_nig(p.scaled(scale).unwrap()), 0.05).unwrap();
        prop_assert!((big.rho - scale * c5.rho).abs() <= 1e-7 * (1.0 + big.rho.abs()));
    }

    #[test]
    fn polynomial_axioms(p in nig(), shift in -1.0f64..1.0, gamma in 2u32..=5) {
        let e = Engine::default();
        let m = MgfModel::from_nig(p);
        let r = e.poly_oce(&m, gamma, None).unwrap();
        prop_assert!(r.foc_residual <= 1e-8, "foc {}", r.foc_residual);
        prop_assert!(r.rho >= -p.mean() - 1e-9);
        let moved = e.poly_oce(&MgfModel::from_nig(p.shifted(shift)), gamma, None).unwrap();
        prop_assert!((moved.rho - (r.rho - shift)).abs() <= 1e-6 * (1.0 + r.rho.abs()));
        prop_assert!((moved.eta_star - (r.eta_star + shift)).abs() <= 1e-6 * (1.0 + r.eta_star.abs()));
        let e_der = e.expected_derivative(&m, &LossSpec::polynomial(gamma).unwrap(), r.eta_star).unwrap();
        prop_assert!((e_der - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn entropic_dominates_the_negative_mean(p in nig(), t in 0.05f64..0.9) {
        let e = Engine::default();
        let m = MgfModel::from_nig(p);
        let gamma = t * -m.strip().lo();
        let r = e.entropic_risk(&m, gamma).unwrap();
        prop_assert!(r.rho >= -p.mean() - 1e-12);
        prop_assert_eq!(r.eta_star, -r.rho);
    }

    #[test]
    fn cdf_is_monotone(p in nig()) {
        let e = Engine::default();
        let m = MgfModel::from_nig(p);
        let sd = p.variance().sqrt();
        let mut prev = 0.0;
        for k in -4..=4 {
            let x = p.mean() + 0.75 * k as f64 * sd;
            let c = e.cdf_fourier(&m, x, None).unwrap();
            prop_assert!(c.probability + 1e-9 >= prev, "F({x}) = {} < {prev}", c.probability);
            prev = c.probability;
        }
    }
}
