//! Result rows, CSV output and the human-readable table.

use std::io::{Read, Write};

use crate::error::{CliError, Result};

pub const HEADER: [&str; 9] = [
    "model",
    "measure",
    "level_gamma",
    "method",
    "value",
    "eta_star",
    "foc_residual",
    "quad_err",
    "wall_time_ms",
];

/// One computed cell. For Monte Carlo rows `quad_err` holds the standard
/// error of the estimate; inapplicable fields are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub model: String,
    pub measure: String,
    pub level_gamma: f64,
    pub method: String,
    pub value: f64,
    pub eta_star: f64,
    pub foc_residual: f64,
    pub quad_err: f64,
    pub wall_time_ms: f64,
}

/// 17 significant digits: enough for every `f64` to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, name: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| CliError::Config(format!("column {name}: `{field}` is not a number")))
}

impl Row {
    fn numbers(&self) -> [f64; 6] {
        [
            self.level_gamma,
            self.value,
            self.eta_star,
            self.foc_residual,
            self.quad_err,
            self.wall_time_ms,
        ]
    }

    pub fn to_record(&self) -> [String; 9] {
        let n = self.numbers().map(fmt_f64);
        [
            self.model.clone(),
            self.measure.clone(),
            n[0].clone(),
            self.method.clone(),
            n[1].clone(),
            n[2].clone(),
            n[3].clone(),
            n[4].clone(),
            n[5].clone(),
        ]
    }

    pub fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != HEADER.len() {
            return Err(CliError::Config(format!(
                "expected {} columns, got {}",
                HEADER.len(),
                r.len()
            )));
        }
        let num = |i: usize| parse_f64(&r[i], HEADER[i]);
        Ok(Row {
            model: r[0].to_string(),
            measure: r[1].to_string(),
            level_gamma: num(2)?,
            method: r[3].to_string(),
            value: num(4)?,
            eta_star: num(5)?,
            foc_residual: num(6)?,
            quad_err: num(7)?,
            wall_time_ms: num(8)?,
        })
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.to_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(CliError::Config(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    r.records().map(|rec| Row::from_record(&rec?)).collect()
}

pub fn write_csv_file(rows: &[Row], path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}

/// Fixed-width table for the terminal.
pub fn render_table(rows: &[Row]) -> String {
    let mut s = format!(
        "{:<44} {:<16} {:>8} {:<14} {:>14} {:>14} {:>10} {:>10} {:>10}\n",
        "model", "measure", "lvl/gam", "method", "value", "eta*", "foc_res", "quad_err", "ms"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<44} {:<16} {:>8} {:<14} {:>14.8} {:>14.8} {:>10.2e} {:>10.2e} {:>10.3}\n",
            truncate(&r.model, 44),
            r.measure,
            format!("{}", r.level_gamma),
            r.method,
            r.value,
            r.eta_star,
            r.foc_residual,
            r.quad_err,
            r.wall_time_ms
        ));
    }
    s
}

fn truncate(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(n - 1).collect();
        t.push('~');
        t
    }
}
