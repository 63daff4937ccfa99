//! Ready-made configurations for the lognormal-delay experiments.
//!
//! `fig3`: zero-wait, offline optimum and online learner at `C = 0` for
//! `(μ, σ) ∈ {(1, 1), (1, 1.5), (2, 1.5)}`.
//! `fig4`: the same three policies on `(μ, σ) = (1, 1.5)` for
//! `C ∈ {0, 5, 20}`.
//!
//! Each panel also gets a `_truncated` twin (delay capped at 50) that runs
//! only the learner and enables the bound checks, which need a finite cap.

use std::path::Path;

use crate::delay::{DelayModel, MomentBounds};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::policy::PolicySpec;

pub const DEFAULT_FRAMES: u64 = 100_000;
pub const DEFAULT_REPS: usize = 50;
pub const TWIN_CAP: f64 = 50.0;
pub const TWIN_FRAMES: u64 = 10_000;
pub const TWIN_REPS: usize = 200;

pub const FIG3_PANELS: [(f64, f64); 3] = [(1.0, 1.0), (1.0, 1.5), (2.0, 1.5)];
pub const FIG4_COSTS: [f64; 3] = [0.0, 5.0, 20.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig3,
    Fig4,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected fig3 or fig4)"
            ))),
        }
    }
}

fn panel(
    name: String,
    model: DelayModel,
    cost: f64,
    frames: u64,
    out_dir: &Path,
) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        model,
        vec![
            PolicySpec::ZeroWait,
            PolicySpec::optimal(),
            PolicySpec::online(),
        ],
        cost,
        frames,
        DEFAULT_REPS,
    );
    cfg.bounds = Some(MomentBounds::exact(&cfg.model));
    cfg.output = Some(out_dir.join(&name));
    cfg.name = name;
    cfg
}

fn truncated_twin(
    base: &ExperimentConfig,
    mu: f64,
    sigma: f64,
    out_dir: &Path,
) -> Result<ExperimentConfig> {
    let model = DelayModel::truncated_lognormal(mu, sigma, TWIN_CAP)?;
    let name = format!("{}_truncated", base.name);
    let mut cfg = ExperimentConfig::new(
        model,
        vec![PolicySpec::online()],
        base.cost,
        TWIN_FRAMES,
        TWIN_REPS,
    );
    cfg.bounds = Some(MomentBounds::exact(&cfg.model));
    cfg.output = Some(out_dir.join(&name));
    cfg.check_bounds = true;
    cfg.name = name;
    Ok(cfg)
}

/// Panel configs followed by their truncated twins.
pub fn configs(preset: Preset, frames: u64, out_dir: &Path) -> Result<Vec<ExperimentConfig>> {
    let mut panels = Vec::new();
    let mut twins = Vec::new();
    match preset {
        Preset::Fig3 => {
            for (i, &(mu, sigma)) in FIG3_PANELS.iter().enumerate() {
                let cfg = panel(
                    format!("fig3_panel{}", i + 1),
                    DelayModel::lognormal(mu, sigma)?,
                    0.0,
                    frames,
                    out_dir,
                );
                twins.push(truncated_twin(&cfg, mu, sigma, out_dir)?);
                panels.push(cfg);
            }
        }
        Preset::Fig4 => {
            let (mu, sigma) = (1.0, 1.5);
            for &cost in &FIG4_COSTS {
                let cfg = panel(
                    format!("fig4_cost{cost}"),
                    DelayModel::lognormal(mu, sigma)?,
                    cost,
                    frames,
                    out_dir,
                );
                twins.push(truncated_twin(&cfg, mu, sigma, out_dir)?);
                panels.push(cfg);
            }
        }
    }
    panels.extend(twins);
    Ok(panels)
}

/// Writes one `<name>.json` per config into `out_dir`; returns the paths.
pub fn write_configs(
    preset: Preset,
    frames: u64,
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    configs(preset, frames, out_dir)?
        .into_iter()
        .map(|cfg| {
            let path = out_dir.join(format!("{}.json", cfg.name));
            cfg.save(&path)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelayKind;

    #[test]
    fn fig3_has_three_panels_and_three_twins() {
        let cfgs = configs(Preset::Fig3, DEFAULT_FRAMES, Path::new("runs")).unwrap();
        assert_eq!(cfgs.len(), 6);
        for cfg in &cfgs[..3] {
            assert_eq!(cfg.model.kind(), DelayKind::Lognormal);
            assert_eq!(cfg.cost, 0.0);
            assert_eq!(cfg.reps, 50);
            assert!(!cfg.check_bounds);
        }
        for cfg in &cfgs[3..] {
            assert_eq!(cfg.model.cap(), Some(TWIN_CAP));
            assert!(cfg.check_bounds);
        }
        assert_eq!(cfgs[2].model, DelayModel::lognormal(2.0, 1.5).unwrap());
    }

    #[test]
    fn fig4_costs() {
        let cfgs = configs(Preset::Fig4, 1000, Path::new("x")).unwrap();
        let costs: Vec<f64> = cfgs[..3].iter().map(|c| c.cost).collect();
        assert_eq!(costs, FIG4_COSTS.to_vec());
        assert!(cfgs.iter().all(|c| c.validate().is_ok()));
    }
}
