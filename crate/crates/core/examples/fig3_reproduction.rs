//! Three lognormal delay panels at zero sampling cost: zero-wait, the
//! offline optimum and the online learner, 50 repetitions each.
//!
//! ```text
//! cargo run --release --example fig3_reproduction -- [frames] [out_dir]
//! ```
//!
//! With an output directory, each panel writes `summary.json` and one
//! `trajectory.csv` per policy.

use std::path::PathBuf;

use aoi_core::harness::presets::{self, Preset};
use aoi_core::harness::run_experiment;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: u64 = match args.next() {
        Some(s) => s.parse()?,
        None => presets::DEFAULT_FRAMES,
    };
    let out: Option<PathBuf> = args.next().map(PathBuf::from);

    let configs = presets::configs(
        Preset::Fig3,
        frames,
        out.as_deref().unwrap_or("runs".as_ref()),
    )?;
    for mut cfg in configs.into_iter().filter(|c| !c.check_bounds) {
        if out.is_none() {
            cfg.output = None;
        }
        let res = run_experiment(&cfg)?;
        let h_star = res.h_star.expect("solver converged");
        println!(
            "{} ({}), h* = {h_star:.4}, gamma* = {:.4}",
            cfg.name,
            cfg.model,
            res.gamma_star.unwrap()
        );
        for p in &res.policies {
            let within = p
                .final_h_bars()
                .iter()
                .filter(|h| ((*h - h_star) / h_star).abs() <= 0.05)
                .count();
            let s = &p.final_h_bar;
            println!(
                "  {:<16} mean h_bar {:>9.4}  95% CI [{:.4}, {:.4}]  within 5% of h*: {within}/{}",
                p.label, s.mean, s.ci_lo, s.ci_hi, s.n
            );
        }
    }
    Ok(())
}
