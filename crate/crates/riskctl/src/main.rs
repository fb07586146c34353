use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oce_fourier::LossSpec;
use riskctl::config::DEFAULT_LEVEL;
use riskctl::{
    engine_for, render_table, reproduce, run, write_csv_file, CliError, DistSpec, MeasureSpec,
    Method, PortfolioSpec, Result, RunConfig,
};

/// Risk measures of distributions given by their moment generating function.
#[derive(Parser, Debug)]
#[command(name = "riskctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value at Risk.
    Var {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        level: Option<f64>,
    },
    /// Conditional Value at Risk, or the general piecewise-linear OCE with
    /// --gamma1/--gamma2.
    Cvar {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with_all = ["gamma1", "gamma2"])]
        level: Option<f64>,
        #[arg(long, requires = "gamma2")]
        gamma1: Option<f64>,
        #[arg(long, requires = "gamma1")]
        gamma2: Option<f64>,
    },
    /// Optimized certainty equivalent: --poly [N], --entropic [G] or
    /// --gamma1/--gamma2.
    Oce {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        loss: LossArgs,
    },
    /// Risk contribution of one position.
    Contrib {
        #[command(flatten)]
        common: Common,
        /// Independent NIG position `alpha beta delta mu`; repeatable.
        #[arg(long, num_args = 4, value_names = ["ALPHA", "BETA", "DELTA", "MU"], allow_negative_numbers = true)]
        component: Vec<f64>,
        /// Index of the position; defaults to the config value, else 0.
        #[arg(long)]
        pick: Option<usize>,
        /// CV@R level (Fourier path).
        #[arg(long)]
        level: Option<f64>,
        #[command(flatten)]
        loss: LossArgs,
    },
    /// Recompute a published table (1, 3, 4, 5 or 6).
    Reproduce {
        table: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = riskctl::config::DEFAULT_REPS)]
        reps: usize,
        #[arg(long = "abs-tol")]
        abs_tol: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// NIG law `alpha beta delta mu`.
    #[arg(long, num_args = 4, value_names = ["ALPHA", "BETA", "DELTA", "MU"], allow_negative_numbers = true)]
    nig: Option<Vec<f64>>,
    /// TOML run configuration; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fourier, standard, density or mc.
    #[arg(long)]
    method: Option<String>,
    /// Dampening override(s).
    #[arg(long = "damp-R", num_args = 1..=4, allow_negative_numbers = true)]
    damp_r: Option<Vec<f64>>,
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timed repetitions after one warm-up.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args, Debug)]
struct LossArgs {
    /// Polynomial loss; the exponent comes from the value or --gamma.
    #[arg(long, num_args = 0..=1, default_missing_value = "0")]
    poly: Option<u32>,
    /// Entropic loss; the risk aversion comes from the value or --gamma.
    #[arg(long, num_args = 0..=1, default_missing_value = "NaN")]
    entropic: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, requires = "gamma2")]
    gamma1: Option<f64>,
    #[arg(long, requires = "gamma1")]
    gamma2: Option<f64>,
}

impl LossArgs {
    fn loss(&self) -> Result<Option<LossSpec>> {
        let chosen = [
            self.poly.is_some(),
            self.entropic.is_some(),
            self.gamma1.is_some(),
        ];
        if chosen.iter().filter(|&&b| b).count() > 1 {
            return Err(CliError::Config(
                "choose one of --poly, --entropic, --gamma1/--gamma2".into(),
            ));
        }
        if let Some(n) = self.poly {
            let n = match (n, self.gamma) {
                (0, Some(g)) if g.fract() == 0.0 && g >= 0.0 => g as u32,
                (0, _) => return Err(CliError::Config("--poly needs an integer exponent".into())),
                (n, _) => n,
            };
            return Ok(Some(LossSpec::polynomial(n)?));
        }
        if let Some(g) = self.entropic {
            let g = if g.is_nan() {
                self.gamma
                    .ok_or_else(|| CliError::Config("--entropic needs a risk aversion".into()))?
            } else {
                g
            };
            return Ok(Some(LossSpec::entropic(g)?));
        }
        match (self.gamma1, self.gamma2) {
            (Some(a), Some(b)) => Ok(Some(LossSpec::piecewise_linear(a, b)?)),
            _ => Ok(None),
        }
    }
}

fn measure_of(loss: LossSpec) -> MeasureSpec {
    match loss {
        LossSpec::Entropic { gamma } => MeasureSpec::Entropic { gamma },
        LossSpec::Polynomial { gamma } => MeasureSpec::Polynomial { gamma },
        LossSpec::PiecewiseLinear { gamma1, gamma2 } => {
            MeasureSpec::PiecewiseLinear { gamma1, gamma2 }
        }
    }
}

fn base_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::empty(),
    };
    if let Some(v) = &c.nig {
        cfg.distribution = Some(DistSpec::Nig {
            alpha: v[0],
            beta: v[1],
            delta: v[2],
            mu: v[3],
        });
    }
    if let Some(m) = &c.method {
        cfg.method = m.parse::<Method>()?;
    }
    if let Some(d) = &c.damp_r {
        cfg.numerics.damp_r = d.clone();
    }
    if c.abs_tol.is_some() {
        cfg.numerics.abs_tol = c.abs_tol;
    }
    if c.samples.is_some() {
        cfg.samples = c.samples;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.out.is_some() {
        cfg.output = c.out.clone();
    }
    if c.reps.is_some() {
        cfg.numerics.reps = c.reps;
    }
    Ok(cfg)
}

/// Level from the flag, else from a config measure of the same kind.
fn level_or(flag: Option<f64>, from_config: Option<f64>) -> f64 {
    flag.or(from_config).unwrap_or(DEFAULT_LEVEL)
}

fn config_for(command: &Command) -> Result<RunConfig> {
    Ok(match command {
        Command::Var { common, level } => {
            let mut cfg = base_config(common)?;
            let prior = match cfg.measure {
                Some(MeasureSpec::Var { level }) => Some(level),
                _ => None,
            };
            cfg.measure = Some(MeasureSpec::Var {
                level: level_or(*level, prior),
            });
            cfg
        }
        Command::Cvar {
            common,
            level,
            gamma1,
            gamma2,
        } => {
            let mut cfg = base_config(common)?;
            cfg.measure = Some(match (gamma1, gamma2, cfg.measure) {
                (Some(a), Some(b), _) => MeasureSpec::PiecewiseLinear {
                    gamma1: *a,
                    gamma2: *b,
                },
                (_, _, Some(m @ MeasureSpec::PiecewiseLinear { .. })) if level.is_none() => m,
                (_, _, Some(MeasureSpec::Cvar { level: l })) => MeasureSpec::Cvar {
                    level: level_or(*level, Some(l)),
                },
                _ => MeasureSpec::Cvar {
                    level: level_or(*level, None),
                },
            });
            cfg
        }
        Command::Oce { common, loss } => {
            let mut cfg = base_config(common)?;
            match loss.loss()? {
                Some(l) => cfg.measure = Some(measure_of(l)),
                None if matches!(
                    cfg.measure,
                    Some(
                        MeasureSpec::Entropic { .. }
                            | MeasureSpec::Polynomial { .. }
                            | MeasureSpec::PiecewiseLinear { .. }
                    )
                ) => {}
                None => {
                    return Err(CliError::Config(
                        "oce needs a loss: --poly, --entropic or --gamma1/--gamma2".into(),
                    ))
                }
            }
            cfg
        }
        Command::Contrib {
            common,
            component,
            pick,
            level,
            loss,
        } => {
            let mut cfg = base_config(common)?;
            if !component.is_empty() {
                cfg.portfolio = Some(PortfolioSpec::Independent {
                    components: component
                        .chunks(4)
                        .map(|v| DistSpec::Nig {
                            alpha: v[0],
                            beta: v[1],
                            delta: v[2],
                            mu: v[3],
                        })
                        .collect(),
                });
            }
            let (prior_pick, prior_level, prior_loss) = match &cfg.measure {
                Some(MeasureSpec::Contribution { pick, level, loss }) => (*pick, *level, *loss),
                _ => (0, None, None),
            };
            // A --level flag selects CV@R over a configured loss.
            let loss = match (loss.loss()?, level) {
                (Some(l), _) => Some(l),
                (None, Some(_)) => None,
                (None, None) => prior_loss,
            };
            cfg.measure = Some(MeasureSpec::Contribution {
                pick: pick.unwrap_or(prior_pick),
                level: if loss.is_some() {
                    None
                } else {
                    Some(level_or(*level, prior_level))
                },
                loss,
            });
            cfg
        }
        Command::Reproduce { .. } => unreachable!("handled separately"),
    })
}

fn execute(cli: Cli) -> Result<u8> {
    if let Command::Reproduce {
        table,
        out,
        reps,
        abs_tol,
    } = &cli.command
    {
        let mut cfg = RunConfig::empty();
        cfg.numerics.abs_tol = *abs_tol;
        let e = engine_for(&cfg)?;
        let rep = reproduce(&e, *table, *reps)?;
        print!("{}", render_table(&rep.rows));
        println!();
        print!("{}", rep.render());
        if let Some(p) = out {
            write_csv_file(&rep.rows, p)?;
        }
        let failed = rep.failures();
        if failed > 0 {
            eprintln!("{failed} cell(s) outside tolerance");
        }
        return Ok(rep.exit_code());
    }
    let cfg = config_for(&cli.command)?;
    let report = run(&cfg)?;
    print!("{}", render_table(&report.rows));
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    if let Some(p) = &cfg.output {
        write_csv_file(&report.rows, p)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("RISKCTL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
