//! Command-line front end behind the `aoi` binary.
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 on
//! numerical failures (quadrature or fixed-point non-convergence).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::delay::{DelayModel, MomentBounds};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::presets::{self, Preset};
use crate::harness::{check_bounds, run_experiment};
use crate::policy::{PolicyContext, PolicySpec};
use crate::sim::{run, write_trace_csv, CheckpointSchedule, RunConfig};
use crate::solver::{solve_fixed_point, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "aoi",
    version,
    about = "Optimal and online sampling for status updates over random-delay channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the optimal threshold and cost for a known delay law.
    Solve(SolveArgs),
    /// Simulate one run and optionally write its frame trace.
    Simulate(SimulateArgs),
    /// Run an experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Verify the learner's convergence envelopes on a capped delay.
    CheckBounds(CheckBoundsArgs),
    /// Write preset experiment configs.
    Preset(PresetArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Delay law, e.g. `lognormal:1,1.5`, `exponential:1`, `truncated_lognormal:1,1.5,50`.
    #[arg(long)]
    model: String,
    /// Sampling cost C.
    #[arg(long, default_value_t = 0.0)]
    cost: f64,
    /// Moment bounds `d_lb,d_ub,m_lb,m_ub[,b]`; exact moments when omitted.
    #[arg(long)]
    bounds: Option<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1e-9)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Starting threshold (clamped into the admissible interval).
    #[arg(long)]
    gamma0: Option<f64>,
    /// Draw the starting threshold uniformly with this seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// `zero_wait`, `fixed` (offline optimum), `fixed:<gamma>` or `online_rm`.
    #[arg(long, default_value = "online_rm")]
    policy: String,
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the full frame trace as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct CheckBoundsArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PresetArgs {
    /// `fig3` or `fig4`.
    name: String,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long, default_value_t = presets::DEFAULT_FRAMES)]
    frames: u64,
}

fn parse_bounds(text: &str) -> Result<MomentBounds> {
    let v = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse `{p}` in --bounds")))
        })
        .collect::<Result<Vec<f64>>>()?;
    match v.as_slice() {
        [a, b, c, d] => MomentBounds::new(*a, *b, *c, *d, None),
        [a, b, c, d, e] => MomentBounds::new(*a, *b, *c, *d, Some(*e)),
        _ => Err(Error::Config(
            "--bounds takes d_lb,d_ub,m_lb,m_ub[,b]".into(),
        )),
    }
}

fn parse_policy(text: &str) -> Result<PolicySpec> {
    match text.split_once(':') {
        None => match text {
            "zero_wait" | "zero-wait" => Ok(PolicySpec::ZeroWait),
            "fixed" | "fixed_threshold" | "optimal" => Ok(PolicySpec::optimal()),
            "online" | "online_rm" => Ok(PolicySpec::online()),
            other => Err(Error::Config(format!("unknown policy `{other}`"))),
        },
        Some(("fixed" | "fixed_threshold", g)) => {
            let gamma = g
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse threshold `{g}`")))?;
            Ok(PolicySpec::FixedThreshold { gamma: Some(gamma) })
        }
        Some(_) => Err(Error::Config(format!("unknown policy `{text}`"))),
    }
}

impl ModelArgs {
    fn resolve(&self) -> Result<(DelayModel, MomentBounds)> {
        let model: DelayModel = self.model.parse()?;
        let bounds = match &self.bounds {
            Some(b) => parse_bounds(b)?,
            None => MomentBounds::exact(&model),
        };
        Ok((model, bounds))
    }
}

fn json_line<W: Write + ?Sized>(out: &mut W, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Solve(args) => {
            let (model, bounds) = args.model.resolve()?;
            let cfg = SolverConfig {
                delta: args.delta,
                max_iter: args.max_iter,
                gamma0: args.gamma0,
                init_seed: args.seed,
            };
            let result = solve_fixed_point(&model, &bounds, args.model.cost, &cfg)?;
            for v in &result.bound_violations {
                let _ = writeln!(stderr, "warning: {v}");
            }
            json_line(stdout, &result)
        }
        Command::Simulate(args) => {
            let (model, bounds) = args.model.resolve()?;
            let cost = args.model.cost;
            let spec = parse_policy(&args.policy)?;
            let gamma_star = match spec {
                PolicySpec::FixedThreshold { gamma: None } => Some(
                    solve_fixed_point(&model, &bounds, cost, &SolverConfig::default())?.gamma_star,
                ),
                _ => None,
            };
            let ctx = PolicyContext {
                bounds: &bounds,
                cost,
                gamma_star,
            };
            let mut policy = spec.build(&ctx)?;
            let cfg = RunConfig {
                frames: args.frames,
                cost,
                seed: args.seed,
                schedule: CheckpointSchedule::default(),
                keep_trace: args.out.is_some(),
            };
            let output = run(&model, policy.as_mut(), &cfg)?;
            if let (Some(path), Some(trace)) = (&args.out, &output.trace) {
                let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
                write_trace_csv(std::io::BufWriter::new(file), trace)
                    .map_err(|e| Error::io(path, e))?;
            }
            json_line(stdout, &output.summary)
        }
        Command::Experiment(args) => {
            let mut cfg = ExperimentConfig::load(&args.config)?;
            if let Some(out) = args.out {
                cfg.output = Some(out);
            }
            if let Some(seed) = args.seed {
                cfg.base_seed = seed;
            }
            if args.threads.is_some() {
                cfg.threads = args.threads;
            }
            let result = run_experiment(&cfg)?;
            for note in &result.notes {
                let _ = writeln!(stderr, "note: {note}");
            }
            #[derive(serde::Serialize)]
            struct Brief<'a> {
                name: &'a str,
                gamma_star: Option<f64>,
                h_star: Option<f64>,
                final_h_bar: Vec<(&'a str, f64)>,
                output: Option<&'a std::path::Path>,
            }
            json_line(
                stdout,
                &Brief {
                    name: &cfg.name,
                    gamma_star: result.gamma_star,
                    h_star: result.h_star,
                    final_h_bar: result
                        .policies
                        .iter()
                        .map(|p| (p.label.as_str(), p.final_h_bar.mean))
                        .collect(),
                    output: cfg.output.as_deref(),
                },
            )
        }
        Command::CheckBounds(args) => {
            let mut cfg = ExperimentConfig::load(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.base_seed = seed;
            }
            if args.threads.is_some() {
                cfg.threads = args.threads;
            }
            let report = check_bounds(&cfg)?;
            for v in report.verdicts.iter().filter(|v| !v.pass) {
                let _ = writeln!(
                    stderr,
                    "FAIL {} at k={}: {} > {}",
                    v.check, v.k, v.lhs, v.rhs
                );
            }
            if let Some(path) = &args.out {
                let text = serde_json::to_string_pretty(&report)?;
                std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
            }
            json_line(stdout, &report)
        }
        Command::Preset(args) => {
            let preset: Preset = args.name.parse()?;
            let paths = presets::write_configs(preset, args.frames, &args.out)?;
            for p in paths {
                writeln!(stdout, "{}", p.display()).map_err(|e| Error::io("<stdout>", e))?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_CONFIG
                }
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_CONFIG
            }
        }
    }
}
