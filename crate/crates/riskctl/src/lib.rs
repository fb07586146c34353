//! Library half of the `riskctl` command: configuration, evaluation,
//! table reproduction and CSV output.

pub mod config;
pub mod error;
pub mod report;
pub mod reproduce;
pub mod run;

pub use config::{DistSpec, MeasureSpec, Method, NumericsSpec, PortfolioSpec, RunConfig};
pub use error::{CliError, Result};
pub use report::{read_csv, render_table, write_csv, write_csv_file, Row};
pub use reproduce::{reproduce, CellCheck, Reproduction};
pub use run::{engine_for, run, RunReport};
