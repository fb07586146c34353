//! Acceptance gate for the command-line tool. Prints one PASS/FAIL line per
//! check and fails at the end if any check failed.

mod support;

use oce_fourier::reference::{tolerance, POLYNOMIAL, POLYNOMIAL_TOL, VAR_CVAR, VAR_CVAR_TOL};
use riskctl::report::fmt_f64;
use riskctl::reproduce::{CellCheck, Reproduction};
use riskctl::{read_csv, Row};
use support::{riskctl, riskctl_rows};

/// Published table cells are compared within this distance.
const TABLE_TOL: f64 = 1e-3;

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

fn model_index(r: &Row) -> usize {
    r.model.trim_start_matches("NIG").parse::<usize>().unwrap() - 1
}

fn cli_examples(gate: &mut Gate, dir: &std::path::Path) {
    let (o, rows) = riskctl_rows(
        dir,
        &[
            "cvar", "--nig", "106", "-26", "0.011", "0", "--level", "0.05", "--method", "fourier",
            "--reps", "1",
        ],
    );
    let v = rows.first().map_or(f64::NAN, |r| r.value);
    let tol = tolerance(0.0298, VAR_CVAR_TOL.0, VAR_CVAR_TOL.1);
    gate.check(
        1,
        "cvar NIG1 5%",
        o.status.success() && (v - 0.0298).abs() <= tol,
        format!("{v:.6} vs 0.0298"),
    );

    let (o, rows) = riskctl_rows(
        dir,
        &[
            "var", "--nig", "1", "0", "1", "0", "--level", "0.5", "--reps", "1",
        ],
    );
    let v = rows.first().map_or(f64::NAN, |r| r.value);
    gate.check(
        2,
        "var symmetric median",
        o.status.success() && v.abs() <= 1e-6,
        format!("{v:.3e}"),
    );

    let (o, rows) = riskctl_rows(
        dir,
        &[
            "oce", "--poly", "4", "--nig", "1", "0", "1", "0", "--reps", "1",
        ],
    );
    let (eta, rho) = rows
        .first()
        .map_or((f64::NAN, f64::NAN), |r| (r.eta_star, r.value));
    let ok = o.status.success()
        && (eta + 1.0283).abs() <= tolerance(1.0283, POLYNOMIAL_TOL.0, POLYNOMIAL_TOL.1)
        && (rho - 1.4994).abs() <= tolerance(1.4994, POLYNOMIAL_TOL.0, POLYNOMIAL_TOL.1);
    gate.check(3, "oce poly 4", ok, format!("eta* {eta:.6} rho {rho:.6}"));
}

fn reproduce_tables(gate: &mut Gate, dir: &std::path::Path) {
    for table in [3u32, 4] {
        let (lambda, var_ref, cvar_ref) = VAR_CVAR[(table - 3) as usize];
        let (o, rows) = riskctl_rows(dir, &["reproduce", &table.to_string(), "--reps", "1"]);
        gate.check(
            4,
            &format!("reproduce {table} exit"),
            o.status.success(),
            format!("{:?}", o.status.code()),
        );
        for r in rows.iter().filter(|r| r.method == "fourier") {
            let i = model_index(r);
            let reference = if r.measure == "var" {
                var_ref[i]
            } else {
                cvar_ref[i]
            };
            let d = r.value - reference;
            gate.check(
                4,
                &format!("table {table} {} {} {}", r.model, r.measure, lambda),
                d.abs() <= TABLE_TOL,
                format!("{:.6} vs {reference} (delta {d:.1e})", r.value),
            );
        }
    }
    for table in [5u32, 6] {
        let (o, rows) = riskctl_rows(dir, &["reproduce", &table.to_string(), "--reps", "1"]);
        gate.check(
            5,
            &format!("reproduce {table} exit"),
            o.status.success(),
            format!("{:?}", o.status.code()),
        );
        let fourier: Vec<&Row> = rows.iter().filter(|r| r.method == "fourier").collect();
        gate.check(
            5,
            &format!("table {table} cells"),
            !fourier.is_empty(),
            format!("{} rows", fourier.len()),
        );
        for r in fourier {
            let gamma = r.level_gamma as u32;
            let (_, cells) = POLYNOMIAL
                .iter()
                .find(|(g, _)| *g == gamma)
                .expect("published gamma");
            let (eta_ref, rho_ref) = cells[model_index(r)];
            let ok =
                (r.eta_star - eta_ref).abs() <= TABLE_TOL && (r.value - rho_ref).abs() <= TABLE_TOL;
            gate.check(
                5,
                &format!("table {table} {} gamma={gamma}", r.model),
                ok,
                format!(
                    "({:.6}, {:.6}) vs ({eta_ref}, {rho_ref})",
                    r.eta_star, r.value
                ),
            );
        }
    }
}

fn csv_round_trip(gate: &mut Gate, dir: &std::path::Path) {
    let path = dir.join("rt.csv");
    let o = riskctl(&[
        "cvar",
        "--nig",
        "3.4",
        "-0.1",
        "0.9",
        "0.05",
        "--level",
        "0.01",
        "--reps",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    let rows = read_csv(text.as_bytes()).unwrap_or_default();
    let mut rewritten = Vec::new();
    riskctl::write_csv(&rows, &mut rewritten).unwrap();
    let same_text = String::from_utf8(rewritten).unwrap() == text;
    let digits = rows
        .first()
        .map(|r| {
            fmt_f64(r.value)
                .split('e')
                .next()
                .unwrap()
                .replace(['.', '-'], "")
                .len()
                == 17
        })
        .unwrap_or(false);
    gate.check(
        6,
        "csv re-parse is bit exact",
        o.status.success() && !rows.is_empty() && same_text,
        format!("{} rows", rows.len()),
    );
    gate.check(
        6,
        "17 significant digits",
        digits,
        rows.first().map(|r| fmt_f64(r.value)).unwrap_or_default(),
    );
}

fn exit_status(gate: &mut Gate) {
    let ok = riskctl(&["reproduce", "1"]).status.code() == Some(0);
    gate.check(7, "exit 0 without failures", ok, "reproduce 1".into());
    let mut rep = Reproduction::default();
    rep.checks.push(CellCheck {
        label: "inside".into(),
        computed: 1.0,
        reference: 1.0005,
        tolerance: 1e-3,
        wall_time_ms: 0.0,
    });
    let clean = rep.exit_code();
    rep.checks.push(CellCheck {
        label: "outside".into(),
        computed: 1.0,
        reference: 1.01,
        tolerance: 1e-3,
        wall_time_ms: 0.0,
    });
    let flagged = rep.exit_code();
    gate.check(
        7,
        "exit nonzero when cells fail",
        clean == 0 && flagged == 1,
        format!("{clean} then {flagged}"),
    );
    let code = riskctl(&["cvar", "--nig", "1", "2", "1", "0"])
        .status
        .code();
    gate.check(
        7,
        "exit nonzero on error",
        code == Some(2),
        format!("{code:?}"),
    );
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let mut gate = Gate {
        failures: Vec::new(),
    };
    cli_examples(&mut gate, dir.path());
    reproduce_tables(&mut gate, dir.path());
    csv_round_trip(&mut gate, dir.path());
    exit_status(&mut gate);
    assert!(gate.failures.is_empty(), "failed: {:#?}", gate.failures);
}
