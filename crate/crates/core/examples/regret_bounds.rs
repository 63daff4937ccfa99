//! Convergence envelopes of the online learner on a capped delay.
//!
//! Runs 200 repetitions on lognormal(1, 1.5) truncated at 50 and prints the
//! Monte-Carlo estimates next to their theoretical bounds.
//!
//! ```text
//! cargo run --release --example regret_bounds
//! ```

use aoi_core::harness::bounds::{AVERAGE_REGRET, GAMMA_MSE};
use aoi_core::harness::{check_bounds, ExperimentConfig};
use aoi_core::{DelayModel, PolicySpec};

fn main() -> anyhow::Result<()> {
    let model = DelayModel::truncated_lognormal(1.0, 1.5, 50.0)?;
    let cfg = ExperimentConfig::new(model, vec![PolicySpec::online()], 0.0, 10_000, 200);
    let report = check_bounds(&cfg)?;
    println!(
        "gamma* = {:.4}, h* = {:.4}, L_ub = {:.2}",
        report.gamma_star, report.h_star, report.envelope.l_ub
    );

    println!(
        "\n{:>6} {:>12} {:>12} {:>12} {:>12}",
        "k", "mse", "bound", "h_bar - h*", "bound"
    );
    let mse = report.verdicts_for(GAMMA_MSE);
    let regret = report.verdicts_for(AVERAGE_REGRET);
    for (m, r) in mse
        .zip(regret)
        .filter(|(m, _)| [1, 10, 100, 1000, 10_000].contains(&m.k))
    {
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            m.k, m.lhs, m.rhs, r.lhs, r.rhs
        );
    }

    println!("\nscaled gap (h_bar - h*)·K/(1 + ln K) over the last decade:");
    for p in report.rate.iter().filter(|p| p.k * 10 >= report.frames) {
        println!("  K = {:>6}: {:>9.4} ± {:.4}", p.k, p.scaled_gap, p.noise);
    }
    let failed: Vec<_> = report.verdicts.iter().filter(|v| !v.pass).collect();
    println!(
        "\n{} checks, {} failed",
        report.verdicts.len(),
        failed.len()
    );
    Ok(())
}
