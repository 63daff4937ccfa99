use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::delay::{validate_bounds, DelayModel, MomentBounds};
use crate::error::{Error, Result};
use crate::policy::PolicySpec;
use crate::sim::CheckpointSchedule;
use crate::solver::SolverConfig;

fn default_name() -> String {
    "experiment".to_string()
}

fn default_seed() -> u64 {
    1
}

/// One experiment, as stored in a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: DelayModel,
    pub policies: Vec<PolicySpec>,
    pub cost: f64,
    /// Frames per run.
    pub frames: u64,
    pub reps: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    /// A-priori bounds handed to the learner; the model's exact moments
    /// when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<MomentBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub checkpoints: CheckpointSchedule,
    /// Worker threads; all available cores when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Also run the regret bound checks (capped models only).
    #[serde(default)]
    pub check_bounds: bool,
}

impl ExperimentConfig {
    pub fn new(
        model: DelayModel,
        policies: Vec<PolicySpec>,
        cost: f64,
        frames: u64,
        reps: usize,
    ) -> Self {
        ExperimentConfig {
            name: default_name(),
            model,
            policies,
            cost,
            frames,
            reps,
            base_seed: default_seed(),
            bounds: None,
            output: None,
            checkpoints: CheckpointSchedule::default(),
            threads: None,
            solver: SolverConfig::default(),
            check_bounds: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn effective_bounds(&self) -> MomentBounds {
        self.bounds
            .unwrap_or_else(|| MomentBounds::exact(&self.model))
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        if !(self.cost.is_finite() && self.cost >= 0.0) {
            return Err(Error::Config(format!(
                "cost must be non-negative, got {}",
                self.cost
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.effective_bounds()
            .check()
            .map_err(|e| Error::Config(e.to_string()))?;
        for p in &self.policies {
            match p {
                PolicySpec::FixedThreshold { gamma: Some(g) } if !(g.is_finite() && *g >= 0.0) => {
                    return Err(Error::Config(format!(
                        "fixed threshold must be non-negative, got {g}"
                    )));
                }
                PolicySpec::OnlineRm {
                    step_scale: Some(s),
                    ..
                } if !(s.is_finite() && *s >= 0.0) => {
                    return Err(Error::Config(format!(
                        "step_scale must be non-negative, got {s}"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Human-readable warnings about the declared bounds.
    pub fn bound_warnings(&self) -> Vec<String> {
        validate_bounds(&self.model, &self.effective_bounds())
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }
}
