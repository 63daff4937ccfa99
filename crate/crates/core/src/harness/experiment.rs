//! Repetition fan-out, aggregation and artifact output.
//!
//! Work items are `(policy, rep)` pairs. Rep `i` simulates with seed
//! `derive_seed(base_seed, i)` for every policy, so the policies see the same
//! delay sequence. Results are merged in rep order, which makes parallel and
//! serial execution byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delay::DelayModel;
use crate::error::{Error, Result};
use crate::harness::bounds::{check_bounds_with, BoundReport};
use crate::harness::config::ExperimentConfig;
use crate::harness::stats::SampleStats;
use crate::policy::{PolicyContext, PolicySpec};
use crate::rng::derive_seed;
use crate::sim::{run, RunConfig, RunSummary};
use crate::solver::{policy_cost, solve_fixed_point, SolverResult};

pub const TRAJECTORY_CSV_HEADER: &str = "checkpoint_k,mean_h_bar,std_h_bar,ci_lo,ci_hi,mean_gamma";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub label: String,
    pub spec: PolicySpec,
    pub checkpoints: Vec<u64>,
    /// Cross-rep statistics of `h̄` at each checkpoint.
    pub h_bar: Vec<SampleStats>,
    /// Mean threshold at each checkpoint, adaptive policies only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_gamma: Option<Vec<f64>>,
    /// Mean elapsed time `Σ L` at each checkpoint.
    pub mean_elapsed: Vec<f64>,
    pub final_h_bar: SampleStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_file: Option<String>,
    #[serde(skip)]
    pub runs: Vec<RunSummary>,
}

impl PolicyResult {
    /// Per-rep `h̄` at checkpoint `k`, if `k` was recorded.
    pub fn h_bar_at(&self, k: u64) -> Option<Vec<f64>> {
        let idx = self.checkpoints.iter().position(|&c| c == k)?;
        Some(
            self.runs
                .iter()
                .map(|r| r.checkpoints[idx].h_bar())
                .collect(),
        )
    }

    pub fn final_h_bars(&self) -> Vec<f64> {
        self.runs.iter().map(RunSummary::h_bar).collect()
    }

    /// Writes `checkpoint_k,mean_h_bar,std_h_bar,ci_lo,ci_hi,mean_gamma`.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for (i, k) in self.checkpoints.iter().enumerate() {
            let s = &self.h_bar[i];
            let gamma = self
                .mean_gamma
                .as_ref()
                .map(|g| g[i].to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{k},{},{},{},{},{gamma}",
                s.mean, s.std, s.ci_lo, s.ci_hi
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub gamma_star: Option<f64>,
    pub h_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_error: Option<String>,
    /// Closed-form long-run cost of zero-wait.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_wait_cost: Option<f64>,
    pub policies: Vec<PolicyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_report: Option<BoundReport>,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn policy(&self, label: &str) -> Option<&PolicyResult> {
        self.policies.iter().find(|p| p.label == label)
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `reps` independent replications of one policy, in rep order.
pub fn replicate(
    model: &DelayModel,
    spec: &PolicySpec,
    ctx: &PolicyContext<'_>,
    template: &RunConfig,
    base_seed: u64,
    reps: usize,
    threads: Option<usize>,
) -> Result<Vec<RunSummary>> {
    // Fail fast on construction errors before fanning out.
    spec.build(ctx)?;
    let pool = thread_pool(threads)?;
    pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut policy = spec.build(ctx)?;
                let cfg = RunConfig {
                    seed: derive_seed(base_seed, rep as u64),
                    keep_trace: false,
                    ..template.clone()
                };
                run(model, policy.as_mut(), &cfg).map(|o| o.summary)
            })
            .collect()
    })
}

pub(crate) fn aggregate(label: String, spec: PolicySpec, runs: Vec<RunSummary>) -> PolicyResult {
    let checkpoints = runs[0].checkpoint_frames();
    let n = runs.len() as f64;
    let mut h_bar = Vec::with_capacity(checkpoints.len());
    let mut mean_elapsed = Vec::with_capacity(checkpoints.len());
    let mut mean_gamma = Vec::with_capacity(checkpoints.len());
    let adaptive = runs[0].checkpoints.iter().any(|c| c.gamma.is_some());
    for i in 0..checkpoints.len() {
        let values: Vec<f64> = runs.iter().map(|r| r.checkpoints[i].h_bar()).collect();
        h_bar.push(SampleStats::from_slice(&values));
        mean_elapsed.push(runs.iter().map(|r| r.checkpoints[i].sum_l).sum::<f64>() / n);
        if adaptive {
            mean_gamma.push(
                runs.iter()
                    .map(|r| r.checkpoints[i].gamma.unwrap_or(f64::NAN))
                    .sum::<f64>()
                    / n,
            );
        }
    }
    let final_h_bar =
        SampleStats::from_slice(&runs.iter().map(RunSummary::h_bar).collect::<Vec<_>>());
    PolicyResult {
        label,
        spec,
        checkpoints,
        h_bar,
        mean_gamma: adaptive.then_some(mean_gamma),
        mean_elapsed,
        final_h_bar,
        trajectory_file: None,
        runs,
    }
}

fn unique_labels(specs: &[PolicySpec]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::with_capacity(specs.len());
    for spec in specs {
        let base = spec.label();
        let taken = labels
            .iter()
            .filter(|l| l.as_str() == base || l.starts_with(&format!("{base}_")))
            .count();
        labels.push(if taken == 0 {
            base.to_string()
        } else {
            format!("{base}_{}", taken + 1)
        });
    }
    labels
}

/// Runs the experiment in memory without writing anything.
pub fn simulate_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let bounds = config.effective_bounds();
    let mut notes: Vec<String> = config
        .bound_warnings()
        .into_iter()
        .map(|w| format!("bounds: {w}"))
        .collect();

    let (solver, solver_error) =
        match solve_fixed_point(&config.model, &bounds, config.cost, &config.solver) {
            Ok(r) => (Some(r), None),
            Err(e) => {
                notes.push(format!(
                    "offline solver failed, continuing with empirical output only: {e}"
                ));
                (None, Some(e.to_string()))
            }
        };
    let gamma_star = solver.as_ref().map(|s| s.gamma_star);
    let zero_wait_cost = policy_cost(&config.model, 0.0, config.cost).ok();

    let ctx = PolicyContext {
        bounds: &bounds,
        cost: config.cost,
        gamma_star,
    };
    let template = RunConfig {
        frames: config.frames,
        cost: config.cost,
        seed: 0,
        schedule: config.checkpoints,
        keep_trace: false,
    };

    let mut policies = Vec::with_capacity(config.policies.len());
    for (spec, label) in config.policies.iter().zip(unique_labels(&config.policies)) {
        if matches!(spec, PolicySpec::FixedThreshold { gamma: None }) && gamma_star.is_none() {
            notes.push(format!("skipping {label}: no offline optimum available"));
            continue;
        }
        let runs = replicate(
            &config.model,
            spec,
            &ctx,
            &template,
            config.base_seed,
            config.reps,
            config.threads,
        )?;
        policies.push(aggregate(label, spec.clone(), runs));
    }
    if config.reps == 1 {
        notes.push("single repetition: confidence intervals have zero width".into());
    }

    let bound_report = if config.check_bounds {
        match (&solver, config.model.cap().or(bounds.cap)) {
            (Some(s), Some(_)) => Some(check_bounds_with(config, s)?),
            (_, None) => {
                notes.push("bound checks skipped: delay has no finite cap".into());
                None
            }
            (None, _) => {
                notes.push("bound checks skipped: offline solver failed".into());
                None
            }
        }
    } else {
        None
    };

    Ok(ExperimentResult {
        config: config.clone(),
        gamma_star,
        h_star: solver.as_ref().map(|s| s.h_star),
        solver,
        solver_error,
        zero_wait_cost,
        policies,
        bound_report,
        notes,
    })
}

/// Writes `summary.json` and `<policy>/trajectory.csv` under `dir`.
pub fn write_artifacts(result: &mut ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for p in &mut result.policies {
        let sub = dir.join(&p.label);
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        let file = sub.join("trajectory.csv");
        std::fs::write(&file, p.trajectory_csv()).map_err(|e| Error::io(&file, e))?;
        p.trajectory_file = Some(format!("{}/trajectory.csv", p.label));
    }
    let summary = dir.join("summary.json");
    let text = serde_json::to_string_pretty(result)?;
    std::fs::write(&summary, text + "\n").map_err(|e| Error::io(&summary, e))
}

/// Runs the experiment and, when the config names an output directory,
/// writes its artifacts there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let mut result = simulate_experiment(config)?;
    if let Some(dir) = &config.output {
        write_artifacts(&mut result, dir)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Checkpoint;

    fn fake_run(h: &[(f64, f64)]) -> RunSummary {
        RunSummary {
            policy: "zero_wait".into(),
            frames: h.len() as u64,
            cost: 0.0,
            seed: 0,
            sum_l: h.last().unwrap().0,
            sum_x: h.last().unwrap().1,
            sum_y: h.last().unwrap().1,
            checkpoints: h
                .iter()
                .enumerate()
                .map(|(i, &(l, y))| Checkpoint {
                    k: i as u64 + 1,
                    sum_l: l,
                    sum_x: y,
                    sum_y: y,
                    sum_r: y,
                    gamma: None,
                })
                .collect(),
        }
    }

    #[test]
    fn aggregation_matches_hand_values() {
        // Final h̄ per rep: 2, 4, 9.
        let runs = vec![
            fake_run(&[(1.0, 1.0), (2.0, 4.0)]),
            fake_run(&[(1.0, 3.0), (2.0, 8.0)]),
            fake_run(&[(1.0, 2.0), (2.0, 18.0)]),
        ];
        let r = aggregate("zero_wait".into(), PolicySpec::ZeroWait, runs);
        assert_eq!(r.checkpoints, vec![1, 2]);
        assert_eq!(r.h_bar[0].mean, 2.0);
        assert_eq!(r.h_bar[0].std, 1.0);
        assert_eq!(r.final_h_bar.mean, 5.0);
        assert_eq!(r.final_h_bar.std, 13.0f64.sqrt());
        assert_eq!(r.mean_elapsed, vec![1.0, 2.0]);
        assert!(r.mean_gamma.is_none());
        let csv = r.trajectory_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
        assert!(lines[1].starts_with("1,2,1,"));
        assert!(lines[1].ends_with(','));
    }

    #[test]
    fn duplicate_policy_labels_are_suffixed() {
        let specs = vec![
            PolicySpec::FixedThreshold { gamma: Some(1.0) },
            PolicySpec::FixedThreshold { gamma: Some(2.0) },
            PolicySpec::ZeroWait,
        ];
        assert_eq!(
            unique_labels(&specs),
            vec!["fixed_threshold", "fixed_threshold_2", "zero_wait"]
        );
    }

    #[test]
    fn serial_and_parallel_agree() {
        let m = DelayModel::exponential(1.0).unwrap();
        let mut cfg = ExperimentConfig::new(
            m,
            vec![PolicySpec::online(), PolicySpec::ZeroWait],
            1.0,
            500,
            6,
        );
        cfg.threads = Some(1);
        let serial = simulate_experiment(&cfg).unwrap();
        cfg.threads = Some(4);
        let parallel = simulate_experiment(&cfg).unwrap();
        assert_eq!(serial.policies, parallel.policies);
    }

    #[test]
    fn single_frame_single_rep_is_flagged() {
        let m = DelayModel::constant(2.0).unwrap();
        let cfg = ExperimentConfig::new(m, vec![PolicySpec::ZeroWait], 0.0, 1, 1);
        let r = simulate_experiment(&cfg).unwrap();
        let p = r.policy("zero_wait").unwrap();
        assert!(p.final_h_bar.degenerate);
        assert_eq!(p.final_h_bar.ci_lo, p.final_h_bar.ci_hi);
        // One frame of constant delay 2: X = 2, L = 2.
        assert_eq!(p.final_h_bar.mean, 1.0);
        assert!(r.notes.iter().any(|n| n.contains("single repetition")));
    }
}
