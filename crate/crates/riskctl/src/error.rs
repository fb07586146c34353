use oce_fourier::RiskError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("method `{method}` is not available for {measure}")]
    Unsupported { method: String, measure: String },
}

pub type Result<T> = std::result::Result<T, CliError>;
