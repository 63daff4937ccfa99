//! Offline optimum for several delay laws.
//!
//! Prints `γ*`, `h*` and how much zero-wait loses, for a sampling cost
//! given as the first argument (default 0).
//!
//! ```text
//! cargo run --example solve_offline -- 5
//! ```

use aoi_core::solver::{policy_cost, solve_fixed_point, SolverConfig};
use aoi_core::{DelayModel, MomentBounds};

fn main() -> anyhow::Result<()> {
    let cost: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.0);
    let models = [
        DelayModel::constant(1.0)?,
        DelayModel::uniform(0.0, 2.0)?,
        DelayModel::exponential(1.0)?,
        DelayModel::lognormal(1.0, 1.0)?,
        DelayModel::lognormal(1.0, 1.5)?,
        DelayModel::truncated_lognormal(1.0, 1.5, 50.0)?,
        DelayModel::empirical(vec![0.4, 0.5, 0.7, 1.2, 6.0])?,
    ];
    println!("C = {cost}");
    println!(
        "{:<32} {:>10} {:>10} {:>6} {:>12}",
        "model", "gamma*", "h*", "iters", "zero-wait"
    );
    for model in &models {
        let r = solve_fixed_point(
            model,
            &MomentBounds::exact(model),
            cost,
            &SolverConfig::default(),
        )?;
        let zero_wait = policy_cost(model, 0.0, cost)?;
        println!(
            "{:<32} {:>10.4} {:>10.4} {:>6} {:>12.4}",
            model.to_string(),
            r.gamma_star,
            r.h_star,
            r.iterations,
            zero_wait
        );
    }

    // Loose a-priori bounds only widen the search interval.
    let model = DelayModel::exponential(1.0)?;
    let loose = MomentBounds::new(0.8, 1.2, 1.5, 2.5, None)?;
    let r = solve_fixed_point(&model, &loose, cost, &SolverConfig::default())?;
    println!(
        "\nexponential:1 with loose bounds: gamma* = {:.6} in [{:.3}, {:.3}]",
        r.gamma_star, r.gamma_lb, r.gamma_ub
    );
    Ok(())
}
