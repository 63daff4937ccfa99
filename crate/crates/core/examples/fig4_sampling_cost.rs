//! Effect of the sampling cost on lognormal(1, 1.5) delays: zero-wait, the
//! offline optimum and the online learner for `C ∈ {0, 5, 20}`.
//!
//! ```text
//! cargo run --release --example fig4_sampling_cost -- [frames] [out_dir]
//! ```

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
        Preset::Fig4,
        frames,
        out.as_deref().unwrap_or("runs".as_ref()),
    )?;
    println!(
        "{:>5} {:>10} {:>12} {:>12} {:>12}",
        "C", "h*", "zero_wait", "fixed", "online_rm"
    );
    for mut cfg in configs.into_iter().filter(|c| !c.check_bounds) {
        if out.is_none() {
            cfg.output = None;
        }
        let res = run_experiment(&cfg)?;
        let mean = |label: &str| res.policy(label).map_or(f64::NAN, |p| p.final_h_bar.mean);
        println!(
            "{:>5} {:>10.4} {:>12.4} {:>12.4} {:>12.4}",
            cfg.cost,
            res.h_star.unwrap_or(f64::NAN),
            mean("zero_wait"),
            mean("fixed_threshold"),
            mean("online_rm")
        );
    }
    Ok(())
}
