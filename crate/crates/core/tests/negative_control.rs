//! The bound checker must be able to fail. A learner whose steps are
//! perturbed through the `step_scale` hook is run through `check_bounds`.

use aoi_core::harness::bounds::GAMMA_MSE;
use aoi_core::harness::presets::{self, Preset};
use aoi_core::harness::{check_bounds, ExperimentConfig};
use aoi_core::{DelayModel, PolicySpec};

fn scaled(scale: f64, gamma0: Option<f64>) -> PolicySpec {
    PolicySpec::OnlineRm {
        gamma0,
        init_seed: None,
        step_scale: Some(scale),
    }
}

fn truncated_panel() -> ExperimentConfig {
    presets::configs(Preset::Fig3, 1000, std::path::Path::new("unused"))
        .unwrap()
        .into_iter()
        .find(|c| c.name == "fig3_panel2_truncated")
        .unwrap()
}

#[test]
fn frozen_learner_breaks_the_threshold_envelope() {
    // Constant delay 1, C = 4.5: γ* = 3, clip interval [0.5, 5]. Starting at
    // the upper clip with zero step size keeps (γ_k - γ*)² = 4, which
    // crosses (L_ub² + C)²/(d_lb² k) = 1640.25/k once k > 410.
    let model = DelayModel::constant(1.0).unwrap();
    let cfg = ExperimentConfig::new(model, vec![scaled(0.0, Some(5.0))], 4.5, 2000, 4);
    let report = check_bounds(&cfg).unwrap();
    assert!(!report.passed);
    let first_fail = report.verdicts_for(GAMMA_MSE).find(|v| !v.pass).unwrap();
    assert!(
        first_fail.k > 410 && first_fail.k < 1000,
        "failed first at k={}",
        first_fail.k
    );
    assert!(report
        .verdicts_for(GAMMA_MSE)
        .filter(|v| v.k <= 410)
        .all(|v| v.pass));
}

#[test]
fn oversized_steps_break_the_threshold_envelope() {
    // Steps a thousand times too large bounce between the clip limits.
    let model = DelayModel::constant(1.0).unwrap();
    let cfg = ExperimentConfig::new(model, vec![scaled(1000.0, None)], 4.5, 10_000, 4);
    let report = check_bounds(&cfg).unwrap();
    assert!(!report.check_passed(GAMMA_MSE));
}

#[test]
fn doubled_steps_still_meet_the_envelope() {
    // Doubling the gain keeps the iteration convergent and the clip keeps
    // every error below (γ_ub - γ_lb)², far under the envelope.
    let mut cfg = truncated_panel();
    cfg.policies = vec![scaled(2.0, None)];
    cfg.frames = 10_000;
    let report = check_bounds(&cfg).unwrap();
    assert!(report.check_passed(GAMMA_MSE));
    let nominal = {
        let mut c = truncated_panel();
        c.frames = 10_000;
        check_bounds(&c).unwrap()
    };
    assert!(nominal.passed);
}
