//! Monte-Carlo verification of the online learner's convergence envelopes.
//!
//! For a delay capped at `B`, with `L_ub = B + γ_ub` and
//! `κ = (L_ub² + C)² / (D̄·d_lb²)`:
//!
//! - `E[(γ_k - γ*)²] ≤ (L_ub² + C)² / (d_lb²·k)`
//! - `h̄_K - h* ≤ κ·(1 + ln K)/K`
//! - `E[h_{π_K} - h*] ≤ κ/K`
//!
//! Expectations are replaced by means over independent repetitions. `h̄_K`
//! is the ratio of the rep-mean totals `mean(Σ Y) / mean(Σ L)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::experiment::replicate;
use crate::harness::stats::SampleStats;
use crate::policy::{PolicyContext, PolicySpec};
use crate::sim::{Envelope, RunConfig, RunSummary};
use crate::solver::{policy_cost, solve_fixed_point, SolverResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub k: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Verdict {
    fn le(check: &str, k: u64, lhs: f64, rhs: f64) -> Self {
        Verdict {
            check: check.to_string(),
            k,
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `(h̄_K - h*)·K/(1 + ln K)` at one checkpoint, with its Monte-Carlo noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub k: u64,
    pub scaled_gap: f64,
    pub noise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub envelope: Envelope,
    pub gamma_star: f64,
    pub h_star: f64,
    pub reps: usize,
    pub frames: u64,
    pub verdicts: Vec<Verdict>,
    pub rate: Vec<RatePoint>,
    pub passed: bool,
}

impl BoundReport {
    pub fn verdicts_for<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a Verdict> + 'a {
        self.verdicts.iter().filter(move |v| v.check == check)
    }

    pub fn check_passed(&self, check: &str) -> bool {
        self.verdicts_for(check).all(|v| v.pass)
    }
}

pub const GAMMA_MSE: &str = "gamma_mse";
pub const AVERAGE_REGRET: &str = "average_regret";
pub const POLICY_REGRET: &str = "policy_regret";
pub const RATE_BOUNDED: &str = "rate_bounded";
pub const RATE_NON_INCREASING: &str = "rate_non_increasing";

/// Runs the online learner `reps` times and checks every envelope.
pub fn check_bounds(config: &ExperimentConfig) -> Result<BoundReport> {
    config.validate()?;
    let bounds = config.effective_bounds();
    if Envelope::new(&config.model, &bounds, config.cost).is_none() {
        return Err(Error::Config(format!(
            "bound checks need a delay with a finite cap; {} has none",
            config.model
        )));
    }
    let solver = solve_fixed_point(&config.model, &bounds, config.cost, &config.solver)?;
    check_bounds_with(config, &solver)
}

pub(crate) fn check_bounds_with(
    config: &ExperimentConfig,
    solver: &SolverResult,
) -> Result<BoundReport> {
    let bounds = config.effective_bounds();
    let envelope = Envelope::new(&config.model, &bounds, config.cost)
        .ok_or_else(|| Error::Config(format!("{} has no finite delay cap", config.model)))?;
    let spec = config
        .policies
        .iter()
        .find(|p| matches!(p, PolicySpec::OnlineRm { .. }))
        .cloned()
        .unwrap_or_else(PolicySpec::online);
    let ctx = PolicyContext {
        bounds: &bounds,
        cost: config.cost,
        gamma_star: Some(solver.gamma_star),
    };
    let template = RunConfig {
        frames: config.frames,
        cost: config.cost,
        seed: 0,
        schedule: config.checkpoints,
        keep_trace: false,
    };
    let runs = replicate(
        &config.model,
        &spec,
        &ctx,
        &template,
        config.base_seed,
        config.reps,
        config.threads,
    )?;
    evaluate(config, solver, envelope, &runs)
}

fn evaluate(
    config: &ExperimentConfig,
    solver: &SolverResult,
    envelope: Envelope,
    runs: &[RunSummary],
) -> Result<BoundReport> {
    let (gamma_star, h_star) = (solver.gamma_star, solver.h_star);
    let n = runs.len() as f64;
    let ks = runs[0].checkpoint_frames();
    let mut verdicts = Vec::new();
    let mut rate = Vec::new();

    for (i, &k) in ks.iter().enumerate() {
        let mse = runs
            .iter()
            .map(|r| {
                r.checkpoints[i]
                    .gamma
                    .map_or(f64::NAN, |g| (g - gamma_star).powi(2))
            })
            .sum::<f64>()
            / n;
        verdicts.push(Verdict::le(GAMMA_MSE, k, mse, envelope.gamma_mse(k)));

        let mean_y = runs.iter().map(|r| r.checkpoints[i].sum_y).sum::<f64>() / n;
        let mean_l = runs.iter().map(|r| r.checkpoints[i].sum_l).sum::<f64>() / n;
        let gap = mean_y / mean_l - h_star;
        verdicts.push(Verdict::le(
            AVERAGE_REGRET,
            k,
            gap,
            envelope.average_regret(k),
        ));

        let per_rep: Vec<f64> = runs.iter().map(|r| r.checkpoints[i].h_bar()).collect();
        let se = SampleStats::from_slice(&per_rep).std_error();
        let scale = k as f64 / (1.0 + (k as f64).ln());
        rate.push(RatePoint {
            k,
            scaled_gap: gap * scale,
            noise: se * scale,
        });
    }

    // Cost of the policy in force at the final frame.
    let frames = config.frames;
    let mut policy_gaps = Vec::with_capacity(runs.len());
    for r in runs {
        let g = r
            .final_gamma()
            .ok_or_else(|| Error::Config("online run recorded no threshold".into()))?;
        policy_gaps.push(policy_cost(&config.model, g, config.cost)? - h_star);
    }
    let mean_policy_gap = policy_gaps.iter().sum::<f64>() / n;
    verdicts.push(Verdict::le(
        POLICY_REGRET,
        frames,
        mean_policy_gap,
        envelope.policy_regret(frames),
    ));

    // Rate: over the last decade of checkpoints the scaled gap stays below
    // the regret constant and its positive part does not grow by more than
    // twice its noise. A negative gap is already inside the envelope.
    let window: Vec<&RatePoint> = rate.iter().filter(|p| p.k * 10 >= frames).collect();
    for p in &window {
        verdicts.push(Verdict::le(
            RATE_BOUNDED,
            p.k,
            p.scaled_gap,
            envelope.regret_constant(),
        ));
    }
    for pair in window.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let slack = 2.0 * prev.noise.max(cur.noise);
        verdicts.push(Verdict::le(
            RATE_NON_INCREASING,
            cur.k,
            cur.scaled_gap.max(0.0),
            prev.scaled_gap.max(0.0) + slack,
        ));
    }

    let passed = verdicts.iter().all(|v| v.pass);
    Ok(BoundReport {
        envelope,
        gamma_star,
        h_star,
        reps: runs.len(),
        frames,
        verdicts,
        rate,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelayModel;

    #[test]
    fn uncapped_model_is_a_config_error() {
        let m = DelayModel::lognormal(1.0, 1.5).unwrap();
        let cfg = ExperimentConfig::new(m, vec![PolicySpec::online()], 0.0, 100, 2);
        assert!(matches!(check_bounds(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn constant_delay_passes_everything() {
        let m = DelayModel::constant(1.0).unwrap();
        let cfg = ExperimentConfig::new(m, vec![PolicySpec::online()], 4.5, 2000, 3);
        let report = check_bounds(&cfg).unwrap();
        assert!(
            report.passed,
            "{:#?}",
            report
                .verdicts
                .iter()
                .filter(|v| !v.pass)
                .collect::<Vec<_>>()
        );
        assert_eq!(report.envelope.l_ub, 1.0 + 5.0);
        let last = report.verdicts_for(GAMMA_MSE).last().unwrap();
        assert!(last.lhs < 1e-12 && last.margin() > 0.0);
    }
}
