//! Acceptance gate: one PASS/FAIL line per criterion, then a single
//! assertion that every line passed. Run with `--nocapture` to see the
//! report.

use oce_fourier::contrib::{rc_cvar_fourier, rc_general_mc, Portfolio};
use oce_fourier::engine::median_wall_time_ms;
use oce_fourier::oracle::{mc_cvar, mc_oce, mc_var, sample_nig};
use oce_fourier::reference::{tolerance, POLYNOMIAL, POLYNOMIAL_TOL, VAR_CVAR, VAR_CVAR_TOL};
use oce_fourier::{nig_reference_sets, Dampening, Engine, LossSpec, MgfModel, NigParams};

const MC_SAMPLES: usize = 1_000_000;
const COVERAGE_SEEDS: u64 = 50;
const COVERAGE_MIN: usize = 45;

#[derive(Default)]
struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn check(&mut self, criterion: u32, label: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {criterion}: {label}: {detail}");
        if !ok {
            self.failures
                .push(format!("criterion {criterion}: {label}"));
        }
    }
}

fn models() -> Vec<(String, NigParams, MgfModel)> {
    nig_reference_sets()
        .into_iter()
        .enumerate()
        .map(|(i, p)| (format!("NIG{}", i + 1), p, MgfModel::from_nig(p)))
        .collect()
}

fn tables_var_cvar(gate: &mut Gate, e: &Engine) {
    for (criterion, (lambda, var_ref, cvar_ref)) in [1, 2].into_iter().zip(VAR_CVAR) {
        for (i, (name, _, m)) in models().iter().enumerate() {
            let (v, tv) = median_wall_time_ms(1, || e.value_at_risk(m, lambda)).unwrap();
            let (c, tc) = median_wall_time_ms(1, || e.cvar(m, lambda)).unwrap();
            let (a, r) = VAR_CVAR_TOL;
            let dv = (v.rho - var_ref[i]).abs();
            let dc = (c.rho - cvar_ref[i]).abs();
            let ok = dv <= tolerance(var_ref[i], a, r)
                && dc <= tolerance(cvar_ref[i], a, r)
                && tv < 1e3
                && tc < 1e3;
            gate.check(
                criterion,
                &format!("{name} lambda={lambda}"),
                ok,
                format!(
                    "V@R {:.6} (ref {:.4}, {:.1} ms), CV@R {:.6} (ref {:.4}, {:.1} ms)",
                    v.rho, var_ref[i], tv, c.rho, cvar_ref[i], tc
                ),
            );
        }
    }
}

fn tables_polynomial(gate: &mut Gate, e: &Engine) {
    for (gamma, rows) in POLYNOMIAL {
        for (i, (name, _, m)) in models().iter().enumerate() {
            let r = e.poly_oce(m, gamma, None).unwrap();
            let (eta_ref, rho_ref) = rows[i];
            let (a, rel) = POLYNOMIAL_TOL;
            let ok = (r.eta_star - eta_ref).abs() <= tolerance(eta_ref, a, rel)
                && (r.rho - rho_ref).abs() <= tolerance(rho_ref, a, rel);
            gate.check(
                3,
                &format!("{name} gamma={gamma}"),
                ok,
                format!(
                    "eta* {:.6} (ref {eta_ref:.4}), rho {:.6} (ref {rho_ref:.4})",
                    r.eta_star, r.rho
                ),
            );
        }
    }
}

fn timing(gate: &mut Gate, e: &Engine) {
    for lambda in [0.05, 0.01] {
        for (name, _, m) in models() {
            let (_, t_var) = median_wall_time_ms(5, || e.value_at_risk(&m, lambda)).unwrap();
            let (_, t_f) = median_wall_time_ms(5, || e.cvar(&m, lambda)).unwrap();
            let (_, t_s) =
                median_wall_time_ms(5, || e.cvar_standard(&m, lambda, e.cvar_grid)).unwrap();
            gate.check(
                4,
                &format!("{name} lambda={lambda}"),
                t_f <= 1.5 * t_var && t_s >= 2.0 * t_f,
                format!(
                    "V@R {t_var:.2} ms, CV@R fourier {t_f:.2} ms ({:.2}x), standard {t_s:.2} ms ({:.1}x)",
                    t_f / t_var,
                    t_s / t_f
                ),
            );
        }
    }
}

fn dampening_invariance(gate: &mut Gate, e: &Engine) {
    for (name, _, m) in models().into_iter().skip(1).step_by(2) {
        let mom = m.moments();
        let (lo, hi) = (m.strip().lo(), m.strip().hi());

        // Defaults are +/- min(edge / 2, 1 / sd); the alternative halves them.
        let a = e.cvar(&m, 0.05).unwrap();
        let d = Dampening {
            r1: Some(-0.5 * (hi / 2.0).min(1.0 / mom.std)),
            r2: Some(0.5 * (-lo / 2.0).min(1.0 / mom.std)),
            r: None,
        };
        let b = e.cvar_fourier(&m, 0.0, 20.0, d).unwrap();
        let diff = (a.rho - b.rho).abs();
        let bound = 2.0 * (a.quad_err + b.quad_err);
        gate.check(
            5,
            &format!("{name} cvar_fourier"),
            diff < bound,
            format!("|diff| {diff:.3e} < {bound:.3e}"),
        );

        let alt = 0.5 * (-lo / 2.0).min(2.0 / (1.0 + mom.mean.abs() + mom.std));
        let a = e.poly_oce(&m, 2, None).unwrap();
        let b = e.poly_oce(&m, 2, Some(alt)).unwrap();
        let diff = (a.rho - b.rho).abs();
        let bound = 2.0 * (a.quad_err + b.quad_err);
        gate.check(
            5,
            &format!("{name} poly_oce"),
            diff < bound,
            format!("|diff| {diff:.3e} < {bound:.3e} (R default vs {alt:.4})"),
        );

        let x = mom.mean - mom.std;
        let lo_side = (-lo).min(1.0 / mom.std);
        let a = e.cdf_fourier(&m, x, Some(0.5 * lo_side)).unwrap();
        let b = e.cdf_fourier(&m, x, Some(0.2 * lo_side)).unwrap();
        let diff = (a.probability - b.probability).abs();
        let bound = 2.0 * (a.err_est + b.err_est);
        gate.check(
            5,
            &format!("{name} cdf_fourier"),
            diff < bound,
            format!("|diff| {diff:.3e} < {bound:.3e}"),
        );
    }
}

fn cross_method(gate: &mut Gate, e: &Engine) {
    for lambda in [0.05, 0.01] {
        for (i, (name, _, m)) in models().iter().enumerate() {
            let f = e.cvar(m, lambda).unwrap();
            let s = e.cvar_standard(m, lambda, e.cvar_grid).unwrap();
            let d = (f.rho - s.rho).abs();
            gate.check(
                6,
                &format!("{name} lambda={lambda} standard"),
                d <= 1e-3,
                format!("fourier {:.7} standard {:.7} |diff| {d:.2e}", f.rho, s.rho),
            );
            if i >= 2 {
                let dens = e.cvar_density(m, lambda).unwrap();
                let d = (f.rho - dens.rho).abs();
                gate.check(
                    6,
                    &format!("{name} lambda={lambda} density"),
                    d <= 5e-3,
                    format!(
                        "fourier {:.7} density {:.7} |diff| {d:.2e}",
                        f.rho, dens.rho
                    ),
                );
            }
        }
    }
}

fn properties(gate: &mut Gate, e: &Engine) {
    for (name, p, m) in models() {
        let mean = p.mean();
        let sd = p.variance().sqrt();
        let mut notes = Vec::new();
        let mut ok = true;
        let mut expect = |cond: bool, what: String| {
            if !cond {
                ok = false;
                notes.push(what);
            }
        };

        let shifted = MgfModel::from_nig(p.shifted(sd));
        for lambda in [0.05, 0.01] {
            let base = e.cvar(&m, lambda).unwrap();
            let moved = e.cvar(&shifted, lambda).unwrap();
            let err = base.quad_err + moved.quad_err + 1e-8;
            expect(
                (moved.rho - (base.rho - sd)).abs() <= err,
                format!("cash additivity cvar {lambda}"),
            );
        }
        for gamma in [2, 4, 5] {
            let base = e.poly_oce(&m, gamma, None).unwrap();
            let moved = e.poly_oce(&shifted, gamma, None).unwrap();
            let err = base.quad_err + moved.quad_err + 1e-8;
            expect(
                (moved.rho - (base.rho - sd)).abs() <= err,
                format!("cash additivity poly {gamma}"),
            );
        }

        let scaled = MgfModel::from_nig(p.scaled(2.0).unwrap());
        for lambda in [0.05, 0.01] {
            let base = e.cvar(&m, lambda).unwrap();
            let big = e.cvar(&scaled, lambda).unwrap();
            let err = 2.0 * base.quad_err + big.quad_err + 1e-8;
            expect(
                (big.rho - 2.0 * base.rho).abs() <= err,
                format!("homogeneity {lambda}"),
            );
        }

        let v5 = e.value_at_risk(&m, 0.05).unwrap().rho;
        let v1 = e.value_at_risk(&m, 0.01).unwrap().rho;
        let c5 = e.cvar(&m, 0.05).unwrap();
        let c1 = e.cvar(&m, 0.01).unwrap();
        expect(c5.rho >= v5 && c1.rho >= v1, "cvar >= var".into());
        expect(c1.rho >= c5.rho && v1 >= v5, "lambda monotonicity".into());

        let gamma_e = 0.5 * (-m.strip().lo()).min(1.0 / sd);
        let ent = e.entropic_risk(&m, gamma_e).unwrap();
        expect(
            ent.rho >= -mean && c5.rho >= -mean,
            "rho >= -mean (entropic, cvar)".into(),
        );
        let mut max_foc: f64 = c5.foc_residual.max(c1.foc_residual);
        for gamma in [2, 4, 5] {
            let r = e.poly_oce(&m, gamma, None).unwrap();
            expect(r.rho >= -mean, format!("rho >= -mean poly {gamma}"));
            max_foc = max_foc.max(r.foc_residual);
        }
        expect(max_foc <= 1e-8, format!("foc residual {max_foc:.2e}"));

        let detail = if notes.is_empty() {
            format!("all properties hold, max foc residual {max_foc:.2e}")
        } else {
            format!("violated: {}", notes.join(", "))
        };
        gate.check(7, &name, ok, detail);
    }
}

fn contributions(gate: &mut Gate, e: &Engine) {
    let nig4 = MgfModel::from_nig(nig_reference_sets()[3]);
    let portfolio = Portfolio::Independent(vec![nig4.clone(), nig4]);
    let lambda = 0.05;
    let rc1 = rc_cvar_fourier(e, &portfolio, 0, lambda, None).unwrap();
    let rc2 = rc_cvar_fourier(e, &portfolio, 1, lambda, None).unwrap();
    let sym = (rc1.value - rc2.value).abs();
    let sym_bound = 2.0 * rc1.quad_err.max(rc2.quad_err);
    gate.check(
        8,
        "symmetry",
        sym <= sym_bound,
        format!(
            "RC1 {:.8} RC2 {:.8} |diff| {sym:.2e} <= {sym_bound:.2e}",
            rc1.value, rc2.value
        ),
    );

    let total = e.cvar(&portfolio.aggregate().unwrap(), lambda).unwrap();
    let gap = (rc1.value + rc2.value - total.rho).abs();
    gate.check(
        8,
        "full allocation",
        gap <= 1e-3,
        format!(
            "RC1 + RC2 {:.8} vs CV@R {:.8}",
            rc1.value + rc2.value,
            total.rho
        ),
    );

    let loss = LossSpec::cvar(lambda).unwrap();
    let mc = rc_general_mc(&portfolio, 0, &loss, total.eta_star, MC_SAMPLES, 2024).unwrap();
    let se = mc.std_error.unwrap();
    let dev = (mc.value - rc1.value).abs();
    gate.check(
        8,
        "monte carlo agreement",
        dev <= 3.0 * se,
        format!(
            "MC {:.6} +/- {se:.2e}, fourier {:.6}, {:.2} SE",
            mc.value,
            rc1.value,
            dev / se
        ),
    );
}

fn coverage(gate: &mut Gate, e: &Engine) {
    for (name, p, m) in models() {
        let var = e.value_at_risk(&m, 0.05).unwrap().rho;
        let cvar = e.cvar(&m, 0.05).unwrap().rho;
        let is_nig4 = name == "NIG4";
        let entropic = LossSpec::entropic(0.5).unwrap();
        let poly = LossSpec::polynomial(2).unwrap();
        let ent_value = if is_nig4 {
            e.oce(&m, &entropic).unwrap().rho
        } else {
            0.0
        };
        let poly_value = if is_nig4 {
            e.oce(&m, &poly).unwrap().rho
        } else {
            0.0
        };
        let mut hits = [0usize; 4];
        for seed in 0..COVERAGE_SEEDS {
            let s = sample_nig(&p, MC_SAMPLES, seed);
            hits[0] += mc_var(&s, 0.05, seed).unwrap().covers(var, 3.0) as usize;
            hits[1] += mc_cvar(&s, 0.05, seed).unwrap().covers(cvar, 3.0) as usize;
            if is_nig4 {
                hits[2] += mc_oce(&s, &entropic, seed).unwrap().covers(ent_value, 3.0) as usize;
                hits[3] += mc_oce(&s, &poly, seed).unwrap().covers(poly_value, 3.0) as usize;
            }
        }
        let mut pairs = vec![("V@R 5%", hits[0]), ("CV@R 5%", hits[1])];
        if is_nig4 {
            pairs.push(("entropic gamma=0.5", hits[2]));
            pairs.push(("polynomial gamma=2", hits[3]));
        }
        for (label, h) in pairs {
            gate.check(
                9,
                &format!("{name} {label}"),
                h >= COVERAGE_MIN,
                format!("{h}/{COVERAGE_SEEDS} seeds within 3 SE"),
            );
        }
    }
}

#[test]
fn acceptance() {
    let e = Engine::default();
    let mut gate = Gate::default();
    tables_var_cvar(&mut gate, &e);
    tables_polynomial(&mut gate, &e);
    timing(&mut gate, &e);
    dampening_invariance(&mut gate, &e);
    cross_method(&mut gate, &e);
    properties(&mut gate, &e);
    contributions(&mut gate, &e);
    coverage(&mut gate, &e);
    assert!(gate.failures.is_empty(), "failed: {:#?}", gate.failures);
}
