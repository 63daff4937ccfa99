//! Runs an experiment described by a JSON file and reads the artifacts back.
//!
//! ```text
//! cargo run --release --example experiment_from_config -- config.json out_dir
//! ```
//!
//! Without arguments a small config is written to a temporary directory
//! first, which also shows the file format.

use std::path::PathBuf;

use aoi_core::harness::schema::{parse_summary, parse_trajectory_csv};
use aoi_core::harness::{run_experiment, ExperimentConfig};
use aoi_core::{DelayModel, PolicySpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let (config_path, out_dir) = match (args.next(), args.next()) {
        (Some(c), Some(o)) => (PathBuf::from(c), PathBuf::from(o)),
        _ => {
            let dir = std::env::temp_dir().join("aoi_example");
            let path = dir.join("config.json");
            let mut cfg = ExperimentConfig::new(
                DelayModel::uniform(0.5, 4.0)?,
                vec![
                    PolicySpec::ZeroWait,
                    PolicySpec::optimal(),
                    PolicySpec::online(),
                ],
                1.0,
                20_000,
                20,
            );
            cfg.name = "uniform_demo".into();
            cfg.save(&path)?;
            println!(
                "wrote {}:\n{}",
                path.display(),
                std::fs::read_to_string(&path)?
            );
            (path, dir.join("out"))
        }
    };

    let mut cfg = ExperimentConfig::load(&config_path)?;
    cfg.output = Some(out_dir.clone());
    let result = run_experiment(&cfg)?;
    for note in &result.notes {
        eprintln!("note: {note}");
    }

    let summary = parse_summary(&std::fs::read_to_string(out_dir.join("summary.json"))?)?;
    println!("h* = {:?}", summary.h_star);
    for p in &summary.policies {
        let file = out_dir.join(p.trajectory_file.as_deref().unwrap_or_default());
        let rows = parse_trajectory_csv(&std::fs::read_to_string(&file)?)?;
        let last = rows.last().expect("non-empty trajectory");
        println!(
            "{:<16} K = {:>7}  h_bar = {:.4}  CI [{:.4}, {:.4}]  ({})",
            p.label,
            last.checkpoint_k,
            last.mean_h_bar,
            last.ci_lo,
            last.ci_hi,
            file.display()
        );
    }
    Ok(())
}
