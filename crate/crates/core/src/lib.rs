//! Sampling control for status-update systems over channels with random delay.
//!
//! The crate computes the optimal waiting threshold for a known delay
//! distribution, runs an online Robbins-Monro sampler that learns the same
//! threshold without that knowledge, and simulates the resulting
//! Age-of-Information (AoI) process frame by frame.
//!
//! Module map:
//!
//! - [`delay`]: delay distributions, censored moments `E[max{D, γ}]`,
//!   `E[max{D, γ}²]` and a-priori moment bounds.
//! - [`quadrature`]: adaptive Gauss-Kronrod integration used for the
//!   families without closed forms.
//! - [`solver`]: threshold bounds, the mapping `T(γ)` and its fixed point.
//! - [`policy`]: zero-wait, fixed-threshold and online Robbins-Monro samplers.
//! - [`sim`]: the frame-based renewal simulator, AoI sawtooth reconstruction
//!   and regret diagnostics.
//! - [`harness`]: repeated experiments, aggregation, bound checks, presets
//!   and CSV/JSON artifacts.
//! - [`cli`]: the `aoi` command-line front end.
//!
//! Runnable walkthroughs live in `crates/core/examples/`.
//!
//! ```
//! use aoi_core::policy::OnlineRm;
//! use aoi_core::sim::{run, RunConfig};
//! use aoi_core::solver::{solve_fixed_point, SolverConfig};
//! use aoi_core::{DelayModel, MomentBounds};
//!
//! let model = DelayModel::exponential(1.0)?;
//! let bounds = MomentBounds::exact(&model);
//! let opt = solve_fixed_point(&model, &bounds, 0.0, &SolverConfig::default())?;
//! assert!((opt.gamma_star - 0.9012).abs() < 1e-4);
//!
//! let mut learner = OnlineRm::new(&bounds, 0.0, None)?;
//! let out = run(&model, &mut learner, &RunConfig::new(20_000, 0.0, 1))?;
//! assert!((out.summary.h_bar() - opt.h_star).abs() < 0.05);
//! # Ok::<(), aoi_core::Error>(())
//! ```

pub mod cli;
pub mod delay;
pub mod error;
pub mod harness;
pub mod policy;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod solver;

pub use delay::{DelayKind, DelayModel, DelaySpec, MomentBounds};
pub use error::{Error, Result};
pub use policy::{OnlineRm, Policy, PolicySpec};
pub use sim::{FrameRecord, RunConfig, RunOutput, RunSummary};
pub use solver::{SolverConfig, SolverResult};
