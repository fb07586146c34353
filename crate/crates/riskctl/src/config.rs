//! TOML run configuration.
//!
//! Distributions are a tagged tree (`kind = "..."`) so that compound,
//! default and linear-mixture scenarios can nest arbitrary components.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use oce_fourier::contrib::Portfolio;
use oce_fourier::{LossSpec, MgfModel};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Nig {
        alpha: f64,
        beta: f64,
        delta: f64,
        #[serde(default)]
        mu: f64,
    },
    PointMass {
        value: f64,
    },
    /// Random sum; `claims` holds one law for i.i.d. claims or one law per
    /// claim index.
    Compound {
        count_pmf: Vec<f64>,
        claims: Vec<DistSpec>,
    },
    /// Sum of exposures, each present with its default probability.
    DefaultMixture {
        probs: Vec<f64>,
        exposures: Vec<DistSpec>,
    },
    /// Sum of the rows of `matrix * factors`.
    LinearMixture {
        matrix: Vec<Vec<f64>>,
        factors: Vec<DistSpec>,
    },
    /// Sum of independent components.
    Sum {
        components: Vec<DistSpec>,
    },
}

fn build_all(specs: &[DistSpec]) -> Result<Vec<MgfModel>> {
    specs.iter().map(DistSpec::build).collect()
}

impl DistSpec {
    pub fn build(&self) -> Result<MgfModel> {
        Ok(match self {
            DistSpec::Nig {
                alpha,
                beta,
                delta,
                mu,
            } => MgfModel::nig(*alpha, *beta, *delta, *mu)?,
            DistSpec::PointMass { value } => MgfModel::point_mass(*value),
            DistSpec::Compound { count_pmf, claims } => {
                MgfModel::compound(count_pmf, &build_all(claims)?)?
            }
            DistSpec::DefaultMixture { probs, exposures } => {
                MgfModel::default_mixture(probs, &build_all(exposures)?)?
            }
            DistSpec::LinearMixture { matrix, factors } => {
                MgfModel::linear_mixture(matrix, &build_all(factors)?)?
            }
            DistSpec::Sum { components } => MgfModel::independent_sum(&build_all(components)?)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PortfolioSpec {
    Independent {
        components: Vec<DistSpec>,
    },
    Mixture {
        matrix: Vec<Vec<f64>>,
        factors: Vec<DistSpec>,
    },
}

impl PortfolioSpec {
    pub fn build(&self) -> Result<Portfolio> {
        Ok(match self {
            PortfolioSpec::Independent { components } => {
                Portfolio::Independent(build_all(components)?)
            }
            PortfolioSpec::Mixture { matrix, factors } => Portfolio::Mixture {
                matrix: matrix.clone(),
                factors: build_all(factors)?,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Var {
        level: f64,
    },
    Cvar {
        level: f64,
    },
    Entropic {
        gamma: f64,
    },
    Polynomial {
        gamma: u32,
    },
    PiecewiseLinear {
        gamma1: f64,
        gamma2: f64,
    },
    /// Contribution of position `pick`; CV@R at `level` unless `loss` is set.
    Contribution {
        pick: usize,
        #[serde(default)]
        level: Option<f64>,
        #[serde(default)]
        loss: Option<LossSpec>,
    },
}

impl MeasureSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureSpec::Var { .. } => "var",
            MeasureSpec::Cvar { .. } => "cvar",
            MeasureSpec::Entropic { .. } => "entropic",
            MeasureSpec::Polynomial { .. } => "polynomial",
            MeasureSpec::PiecewiseLinear { .. } => "piecewise_linear",
            MeasureSpec::Contribution { .. } => "contribution",
        }
    }

    /// Level for V@R / CV@R, `gamma` for entropic and polynomial, `gamma2`
    /// for piecewise-linear.
    pub fn level_gamma(&self) -> f64 {
        match *self {
            MeasureSpec::Var { level } | MeasureSpec::Cvar { level } => level,
            MeasureSpec::Entropic { gamma } => gamma,
            MeasureSpec::Polynomial { gamma } => gamma as f64,
            MeasureSpec::PiecewiseLinear { gamma2, .. } => gamma2,
            MeasureSpec::Contribution { level, loss, .. } => match (level, loss) {
                (_, Some(LossSpec::Entropic { gamma })) => gamma,
                (_, Some(LossSpec::Polynomial { gamma })) => gamma as f64,
                (_, Some(LossSpec::PiecewiseLinear { gamma2, .. })) => gamma2,
                (Some(l), None) => l,
                (None, None) => DEFAULT_LEVEL,
            },
        }
    }

    /// Loss of the OCE, when the measure is one.
    pub fn loss(&self) -> Result<Option<LossSpec>> {
        Ok(match *self {
            MeasureSpec::Var { .. } => None,
            MeasureSpec::Cvar { level } => Some(LossSpec::cvar(level)?),
            MeasureSpec::Entropic { gamma } => Some(LossSpec::entropic(gamma)?),
            MeasureSpec::Polynomial { gamma } => Some(LossSpec::polynomial(gamma)?),
            MeasureSpec::PiecewiseLinear { gamma1, gamma2 } => {
                Some(LossSpec::piecewise_linear(gamma1, gamma2)?)
            }
            MeasureSpec::Contribution { level, loss, .. } => Some(match loss {
                Some(l) => l.validated()?,
                None => LossSpec::cvar(level.unwrap_or(DEFAULT_LEVEL))?,
            }),
        })
    }
}

pub const DEFAULT_LEVEL: f64 = 0.05;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_REPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Fourier,
    Standard,
    Density,
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fourier => "fourier",
            Method::Standard => "standard",
            Method::Density => "density",
            Method::Mc => "mc",
        })
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(Method::Fourier),
            "standard" => Ok(Method::Standard),
            "density" => Ok(Method::Density),
            "mc" => Ok(Method::Mc),
            other => Err(CliError::Config(format!(
                "unknown method `{other}` (expected fourier, standard, density or mc)"
            ))),
        }
    }
}

/// Quadrature and dampening overrides.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    /// One value (CDF / polynomial), two (CV@R pieces) or four
    /// (contribution points `R1 R2 R1' R2'`).
    #[serde(default)]
    pub damp_r: Vec<f64>,
    /// Timed repetitions after one warm-up.
    pub reps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub distribution: Option<DistSpec>,
    pub portfolio: Option<PortfolioSpec>,
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub numerics: NumericsSpec,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn empty() -> Self {
        Self {
            distribution: None,
            portfolio: None,
            measure: None,
            method: Method::default(),
            numerics: NumericsSpec::default(),
            output: None,
            seed: 0,
            samples: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn reps(&self) -> usize {
        self.numerics.reps.unwrap_or(DEFAULT_REPS).max(1)
    }

    /// Checks that the sections needed by the measure are present.
    pub fn validate(&self) -> Result<()> {
        let measure = self
            .measure
            .ok_or_else(|| CliError::Config("no measure given".into()))?;
        measure.loss()?;
        match measure {
            MeasureSpec::Contribution { pick, level, loss } => {
                let Some(p) = &self.portfolio else {
                    return Err(CliError::Config(
                        "contribution needs a [portfolio] section".into(),
                    ));
                };
                let n = match p {
                    PortfolioSpec::Independent { components } => components.len(),
                    PortfolioSpec::Mixture { matrix, .. } => matrix.len(),
                };
                if pick >= n {
                    return Err(CliError::Config(format!(
                        "pick {pick} out of range for {n} positions"
                    )));
                }
                if level.is_some() && loss.is_some() {
                    return Err(CliError::Config(
                        "give either `level` or `loss`, not both".into(),
                    ));
                }
            }
            _ if self.distribution.is_none() => {
                return Err(CliError::Config("no [distribution] section".into()));
            }
            _ => {}
        }
        if !matches!(self.numerics.damp_r.len(), 0 | 1 | 2 | 4) {
            return Err(CliError::Config("damp_r takes 1, 2 or 4 values".into()));
        }
        Ok(())
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }
}
