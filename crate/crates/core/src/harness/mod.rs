//! Repeated experiments, aggregation, bound verification and presets.

pub mod bounds;
pub mod config;
pub mod experiment;
pub mod presets;
pub mod schema;
pub mod stats;

pub use bounds::{check_bounds, BoundReport, Verdict};
pub use config::ExperimentConfig;
pub use experiment::{run_experiment, simulate_experiment, ExperimentResult, PolicyResult};
pub use stats::SampleStats;
