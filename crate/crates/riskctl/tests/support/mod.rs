//! Helpers shared by the CLI test targets.

use std::path::Path;
use std::process::{Command, Output};

use riskctl::{read_csv, Row};

pub fn riskctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskctl"))
        .args(args)
        .env("RISKCTL_THREADS", "1")
        .output()
        .expect("riskctl runs")
}

/// Runs with `--out` into `dir` and returns the CSV rows.
pub fn riskctl_rows(dir: &Path, args: &[&str]) -> (Output, Vec<Row>) {
    let out = dir.join("out.csv");
    let mut all: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    all.extend(["--out", &out_str]);
    let o = riskctl(&all);
    let rows = if o.status.success() || o.status.code() == Some(1) {
        read_csv(std::fs::File::open(&out).expect("csv written")).unwrap()
    } else {
        Vec::new()
    };
    (o, rows)
}

#[allow(dead_code)]
pub fn example(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}
