//! One run of the online learner next to the offline optimum.
//!
//! The learner only knows moment bounds; it never sees the distribution.
//!
//! ```text
//! cargo run --release --example online_learning
//! ```

use aoi_core::policy::OnlineRm;
use aoi_core::sim::{run, RunConfig};
use aoi_core::solver::{solve_fixed_point, SolverConfig};
use aoi_core::{DelayModel, MomentBounds};

fn main() -> anyhow::Result<()> {
    let model = DelayModel::lognormal(1.0, 1.0)?;
    let cost = 2.0;
    let bounds = MomentBounds::exact(&model);
    let opt = solve_fixed_point(&model, &bounds, cost, &SolverConfig::default())?;

    let mut learner = OnlineRm::new(&bounds, cost, None)?;
    let (lb, ub) = learner.clip_bounds();
    println!(
        "{model}, C = {cost}: gamma* = {:.4}, h* = {:.4}",
        opt.gamma_star, opt.h_star
    );
    println!(
        "learner clip interval [{lb:.3}, {ub:.3}], start {:.3}\n",
        learner.gamma()
    );

    let out = run(&model, &mut learner, &RunConfig::new(100_000, cost, 3))?;
    println!(
        "{:>8} {:>10} {:>10} {:>12}",
        "k", "gamma_k", "h_bar_k", "h_bar - h*"
    );
    for c in out
        .summary
        .checkpoints
        .iter()
        .filter(|c| c.k == 1 || (c.k as f64).log10().fract() == 0.0)
    {
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>12.4}",
            c.k,
            c.gamma.unwrap(),
            c.h_bar(),
            c.h_bar() - opt.h_star
        );
    }
    Ok(())
}
