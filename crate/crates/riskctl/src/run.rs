//! Evaluation of one configured measure.

use oce_fourier::contrib::{rc_cvar_fourier, rc_general_mc, ContributionDampening};
use oce_fourier::engine::median_wall_time_ms;
use oce_fourier::oracle::{mc_cvar, mc_oce, mc_var, sample_model};
use oce_fourier::{Dampening, Engine, LossSpec, MgfModel, OceResult};

use crate::config::{MeasureSpec, Method, RunConfig};
use crate::error::{CliError, Result};
use crate::report::Row;

/// Rows plus diagnostics worth showing to the user.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

pub fn engine_for(cfg: &RunConfig) -> Result<Engine> {
    let mut e = Engine::default();
    if let Some(t) = cfg.numerics.abs_tol {
        e.quadrature.abs_tol = t;
    }
    if let Some(t) = cfg.numerics.rel_tol {
        e.quadrature.rel_tol = t;
    }
    e.quadrature.validate()?;
    Ok(e)
}

/// Result of one timed evaluation, before it becomes a row.
struct Cell {
    value: f64,
    eta_star: f64,
    foc_residual: f64,
    quad_err: f64,
    caution: Option<String>,
}

impl From<OceResult> for Cell {
    fn from(r: OceResult) -> Self {
        Cell {
            value: r.rho,
            eta_star: r.eta_star,
            foc_residual: r.foc_residual,
            quad_err: r.quad_err,
            caution: r.caution,
        }
    }
}

fn unsupported(method: Method, measure: &MeasureSpec) -> CliError {
    CliError::Unsupported {
        method: method.to_string(),
        measure: measure.name().to_string(),
    }
}

fn damp_single(d: &[f64]) -> Result<Option<f64>> {
    match d {
        [] => Ok(None),
        [r] => Ok(Some(*r)),
        _ => Err(CliError::Config(
            "this measure takes one dampening value".into(),
        )),
    }
}

fn damp_pair(d: &[f64]) -> Result<Dampening> {
    match d {
        [] => Ok(Dampening::default()),
        [r1, r2] => Ok(Dampening {
            r: None,
            r1: Some(*r1),
            r2: Some(*r2),
        }),
        _ => Err(CliError::Config(
            "piecewise-linear losses take two dampening values: R for (-x)^+ and R for x^+".into(),
        )),
    }
}

fn mc_cell(cfg: &RunConfig, model: &MgfModel, measure: &MeasureSpec) -> Result<Cell> {
    let sample = sample_model(model, cfg.samples(), cfg.seed);
    let est = match *measure {
        MeasureSpec::Var { level } => mc_var(&sample, level, cfg.seed)?,
        MeasureSpec::Cvar { level } => mc_cvar(&sample, level, cfg.seed)?,
        _ => {
            let loss = measure.loss()?.expect("OCE measures have a loss");
            mc_oce(&sample, &loss, cfg.seed)?
        }
    };
    Ok(Cell {
        value: est.value,
        eta_star: est.eta,
        foc_residual: f64::NAN,
        quad_err: est.std_error,
        caution: None,
    })
}

fn single_cell(
    cfg: &RunConfig,
    e: &Engine,
    model: &MgfModel,
    measure: &MeasureSpec,
) -> Result<Cell> {
    let damp = &cfg.numerics.damp_r;
    let method = cfg.method;
    if method == Method::Mc {
        return mc_cell(cfg, model, measure);
    }
    let r: OceResult = match (*measure, method) {
        (MeasureSpec::Var { level }, Method::Fourier) => {
            e.value_at_risk_damped(model, level, damp_single(damp)?)?
        }
        (MeasureSpec::Cvar { level }, Method::Fourier) => {
            LossSpec::cvar(level)?;
            e.cvar_fourier(model, 0.0, 1.0 / level, damp_pair(damp)?)?
        }
        (MeasureSpec::Cvar { level }, Method::Standard) => {
            e.cvar_standard(model, level, e.cvar_grid)?
        }
        (MeasureSpec::Cvar { level }, Method::Density) => e.cvar_density(model, level)?,
        (MeasureSpec::Entropic { gamma }, Method::Fourier) => e.entropic_risk(model, gamma)?,
        (MeasureSpec::Polynomial { gamma }, Method::Fourier) => {
            e.poly_oce(model, gamma, damp_single(damp)?)?
        }
        (MeasureSpec::PiecewiseLinear { gamma1, gamma2 }, Method::Fourier) => {
            e.cvar_fourier(model, gamma1, gamma2, damp_pair(damp)?)?
        }
        _ => return Err(unsupported(method, measure)),
    };
    Ok(r.into())
}

fn contribution_cell(cfg: &RunConfig, e: &Engine, measure: &MeasureSpec) -> Result<(String, Cell)> {
    let MeasureSpec::Contribution { pick, level, loss } = *measure else {
        unreachable!("caller matched a contribution");
    };
    let portfolio = cfg
        .portfolio
        .as_ref()
        .ok_or_else(|| CliError::Config("contribution needs a [portfolio] section".into()))?
        .build()?;
    let label = format!("portfolio(n={}) position {pick}", portfolio.len());
    let aggregate = portfolio.aggregate()?;
    let loss_spec = measure.loss()?.expect("contributions have a loss");
    let cell = match cfg.method {
        Method::Fourier => {
            let lambda = match (level, loss) {
                (_, None) => level.unwrap_or(crate::config::DEFAULT_LEVEL),
                (
                    None,
                    Some(LossSpec::PiecewiseLinear {
                        gamma1: 0.0,
                        gamma2,
                    }),
                ) => 1.0 / gamma2,
                _ => return Err(unsupported(Method::Fourier, measure)),
            };
            let damp = match cfg.numerics.damp_r.as_slice() {
                [] => None,
                [a, b, c, d] => Some(ContributionDampening {
                    negative: (*a, *b),
                    positive: (*c, *d),
                }),
                _ => {
                    return Err(CliError::Config(
                        "contributions take four dampening values: R1 R2 R1' R2'".into(),
                    ))
                }
            };
            let eta = e.cvar_allocation(&aggregate, 0.0, 1.0 / lambda)?;
            let rc = rc_cvar_fourier(e, &portfolio, pick, lambda, damp)?;
            Cell {
                value: rc.value,
                eta_star: eta.x,
                foc_residual: eta.residual.abs(),
                quad_err: rc.quad_err,
                caution: None,
            }
        }
        Method::Mc => {
            let alloc = e.oce(&aggregate, &loss_spec)?;
            let rc = rc_general_mc(
                &portfolio,
                pick,
                &loss_spec,
                alloc.eta_star,
                cfg.samples(),
                cfg.seed,
            )?;
            let caution = (rc.lower != rc.upper).then(|| {
                format!(
                    "non-differentiable case: contribution between {} and {}",
                    rc.lower, rc.upper
                )
            });
            Cell {
                value: rc.value,
                eta_star: alloc.eta_star,
                foc_residual: alloc.foc_residual,
                quad_err: rc.std_error.unwrap_or(f64::NAN),
                caution,
            }
        }
        m => return Err(unsupported(m, measure)),
    };
    Ok((label, cell))
}

/// Evaluates the configured measure; the wall time is the median over
/// `reps` timed runs after one warm-up.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let e = engine_for(cfg)?;
    let measure = cfg.measure.expect("validated");
    let (label, (cell, ms)) = match measure {
        MeasureSpec::Contribution { .. } => {
            let mut label = String::new();
            let timed = median_wall_time_ms(cfg.reps(), || {
                let (l, c) = contribution_cell(cfg, &e, &measure)?;
                label = l;
                Ok::<_, CliError>(c)
            })?;
            (label, timed)
        }
        _ => {
            let model = cfg.distribution.as_ref().expect("validated").build()?;
            let timed = median_wall_time_ms(cfg.reps(), || single_cell(cfg, &e, &model, &measure))?;
            (model.descriptor().to_string(), timed)
        }
    };
    let mut report = RunReport::default();
    if let Some(c) = &cell.caution {
        report.notes.push(c.clone());
    }
    report.rows.push(Row {
        model: label,
        measure: measure.name().into(),
        level_gamma: measure.level_gamma(),
        method: cfg.method.to_string(),
        value: cell.value,
        eta_star: cell.eta_star,
        foc_residual: cell.foc_residual,
        quad_err: cell.quad_err,
        wall_time_ms: ms,
    });
    Ok(report)
}
