//! Frame-based renewal simulation of a status-update link.
//!
//! Frame `k` starts when packet `k` is generated at `S_k`. The packet spends
//! `D_k` in the channel, the sampler then idles `W_k`, and packet `k + 1` is
//! generated at `S_{k+1} = S_k + L_k` with `L_k = D_k + W_k`. The AoI area
//! accumulated over the frame is `X_k = L_{k-1}·D_k + ½·L_k²`, with
//! `L_0 = 0`, and the frame's total cost is `Y_k = X_k + C`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::delay::{DelayModel, MomentBounds};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::rng::rng_from_seed;
use crate::solver::gamma_bounds;

/// AoI area over one frame: a parallelogram `l_prev·d` plus a triangle `½·l²`.
pub fn frame_aoi_area(l_prev: f64, d: f64, l: f64) -> f64 {
    l_prev * d + 0.5 * l * l
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub k: u64,
    pub d: f64,
    pub w: f64,
    pub l: f64,
    pub x: f64,
    pub y: f64,
    pub gamma: Option<f64>,
    /// Generation epoch `S_k`.
    pub t_start: f64,
}

/// Frame indices at which trajectories are recorded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSchedule {
    /// Growth factor between consecutive log-spaced checkpoints.
    pub ratio: f64,
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule { ratio: 1.25 }
    }
}

impl CheckpointSchedule {
    /// Rounded powers of `ratio`, every power of ten, and `frames` itself.
    pub fn points(&self, frames: u64) -> Vec<u64> {
        let mut pts = Vec::new();
        if frames == 0 {
            return pts;
        }
        let ratio = if self.ratio > 1.0 { self.ratio } else { 1.25 };
        let mut x = 1.0f64;
        while x <= frames as f64 {
            pts.push(x.round() as u64);
            x *= ratio;
        }
        let mut p = 1u64;
        while p <= frames {
            pts.push(p);
            match p.checked_mul(10) {
                Some(next) => p = next,
                None => break,
            }
        }
        pts.push(frames);
        pts.retain(|&k| k >= 1 && k <= frames);
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

/// Cumulative totals after frame `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: u64,
    /// `Σ L`, i.e. the elapsed time `S_{k+1}`.
    pub sum_l: f64,
    pub sum_x: f64,
    pub sum_y: f64,
    /// `Σ R` with `R = ½L² + C`.
    pub sum_r: f64,
    /// Threshold in force during frame `k`, for adaptive policies.
    pub gamma: Option<f64>,
}

impl Checkpoint {
    /// Empirical average cost `Σ Y / Σ L`.
    pub fn h_bar(&self) -> f64 {
        self.sum_y / self.sum_l
    }

    /// Time-average AoI `Σ X / Σ L`.
    pub fn aoi_avg(&self) -> f64 {
        self.sum_x / self.sum_l
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub frames: u64,
    pub cost: f64,
    pub seed: u64,
    pub sum_l: f64,
    pub sum_x: f64,
    pub sum_y: f64,
    pub checkpoints: Vec<Checkpoint>,
}

impl RunSummary {
    pub fn h_bar(&self) -> f64 {
        self.sum_y / self.sum_l
    }

    pub fn checkpoint_frames(&self) -> Vec<u64> {
        self.checkpoints.iter().map(|c| c.k).collect()
    }

    pub fn h_bar_trajectory(&self) -> Vec<f64> {
        self.checkpoints.iter().map(Checkpoint::h_bar).collect()
    }

    pub fn aoi_time_avg_trajectory(&self) -> Vec<f64> {
        self.checkpoints.iter().map(Checkpoint::aoi_avg).collect()
    }

    /// Empty for non-adaptive policies.
    pub fn gamma_trajectory(&self) -> Vec<f64> {
        self.checkpoints.iter().filter_map(|c| c.gamma).collect()
    }

    pub fn final_gamma(&self) -> Option<f64> {
        self.checkpoints.last().and_then(|c| c.gamma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub frames: u64,
    pub cost: f64,
    pub seed: u64,
    pub schedule: CheckpointSchedule,
    pub keep_trace: bool,
}

impl RunConfig {
    pub fn new(frames: u64, cost: f64, seed: u64) -> Self {
        RunConfig {
            frames,
            cost,
            seed,
            schedule: CheckpointSchedule::default(),
            keep_trace: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.keep_trace = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub trace: Option<Vec<FrameRecord>>,
}

/// Simulates `cfg.frames` frames. Identical inputs give bit-identical output.
pub fn run(model: &DelayModel, policy: &mut dyn Policy, cfg: &RunConfig) -> Result<RunOutput> {
    if cfg.frames == 0 {
        return Err(Error::InvalidParameter(
            "a run needs at least one frame".into(),
        ));
    }
    if !(cfg.cost.is_finite() && cfg.cost >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling cost must be non-negative, got {}",
            cfg.cost
        )));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let points = cfg.schedule.points(cfg.frames);
    let mut next_point = points.iter().copied().peekable();
    let mut checkpoints = Vec::with_capacity(points.len());
    let mut trace = cfg
        .keep_trace
        .then(|| Vec::with_capacity(cfg.frames.min(1 << 24) as usize));

    let (mut sum_l, mut sum_x, mut sum_y, mut sum_r) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut l_prev = 0.0f64;
    for k in 1..=cfg.frames {
        let d = model.sample(&mut rng);
        let decision = policy.decide(d);
        let w = decision.wait;
        let l = d + w;
        let x = frame_aoi_area(l_prev, d, l);
        let y = x + cfg.cost;
        if let Some(t) = trace.as_mut() {
            t.push(FrameRecord {
                k,
                d,
                w,
                l,
                x,
                y,
                gamma: decision.gamma,
                t_start: sum_l,
            });
        }
        sum_l += l;
        sum_x += x;
        sum_y += y;
        sum_r += 0.5 * l * l + cfg.cost;
        l_prev = l;
        if next_point.peek() == Some(&k) {
            next_point.next();
            checkpoints.push(Checkpoint {
                k,
                sum_l,
                sum_x,
                sum_y,
                sum_r,
                gamma: if policy.is_adaptive() {
                    decision.gamma
                } else {
                    None
                },
            });
        }
    }

    Ok(RunOutput {
        summary: RunSummary {
            policy: policy.name().to_string(),
            frames: cfg.frames,
            cost: cfg.cost,
            seed: cfg.seed,
            sum_l,
            sum_x,
            sum_y,
            checkpoints,
        },
        trace,
    })
}

/// One slope-1 piece of the AoI sawtooth on `[t0, t1)`, starting at `a0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoiSegment {
    pub t0: f64,
    pub t1: f64,
    pub a0: f64,
}

impl AoiSegment {
    pub fn a1(&self) -> f64 {
        self.a0 + (self.t1 - self.t0)
    }

    /// Trapezoid rule, exact on a linear piece.
    pub fn trapezoid(&self) -> f64 {
        0.5 * (self.a0 + self.a1()) * (self.t1 - self.t0)
    }
}

/// Piecewise-linear `A(t) = t - S_{i(t)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoiCurve {
    pub segments: Vec<AoiSegment>,
    /// For each frame, the index range of its segments.
    pub frame_segments: Vec<std::ops::Range<usize>>,
}

impl AoiCurve {
    /// `A(t)`, right-continuous at reception epochs.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let idx = self.segments.partition_point(|s| s.t1 <= t);
        self.segments
            .get(idx)
            .filter(|s| s.t0 <= t)
            .map(|s| s.a0 + (t - s.t0))
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t1)
    }

    /// Trapezoidal integral of the curve over frame `frame` (0-based).
    pub fn frame_integral(&self, frame: usize) -> f64 {
        self.segments[self.frame_segments[frame].clone()]
            .iter()
            .map(AoiSegment::trapezoid)
            .sum()
    }

    pub fn integral(&self) -> f64 {
        self.segments.iter().map(AoiSegment::trapezoid).sum()
    }

    /// `(1/T) ∫_0^T A(t) dt` over the whole trace.
    pub fn time_average(&self) -> f64 {
        self.integral() / self.end_time()
    }

    /// `(t, A(t))` vertices, with both sides of every downward jump.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.segments.len());
        for s in &self.segments {
            out.push((s.t0, s.a0));
            out.push((s.t1, s.a1()));
        }
        out
    }
}

/// Rebuilds the AoI sawtooth from a full trace. Before packet `k` arrives at
/// `S_k + D_k` the age is `t - S_{k-1}`; afterwards it is `t - S_k`.
pub fn reconstruct_aoi_curve(trace: &[FrameRecord]) -> AoiCurve {
    let mut segments = Vec::with_capacity(2 * trace.len());
    let mut frame_segments = Vec::with_capacity(trace.len());
    let mut l_prev = 0.0;
    for f in trace {
        let start = segments.len();
        let arrival = f.t_start + f.d;
        let end = f.t_start + f.l;
        segments.push(AoiSegment {
            t0: f.t_start,
            t1: arrival,
            a0: l_prev,
        });
        if end > arrival {
            segments.push(AoiSegment {
                t0: arrival,
                t1: end,
                a0: f.d,
            });
        }
        frame_segments.push(start..segments.len());
        l_prev = f.l;
    }
    AoiCurve {
        segments,
        frame_segments,
    }
}

/// Theoretical envelopes for the online learner on a capped delay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub cap: f64,
    pub gamma_ub: f64,
    /// `L_ub = B + γ_ub`.
    pub l_ub: f64,
    pub d_lb: f64,
    pub mean: f64,
    pub cost: f64,
}

impl Envelope {
    /// `None` when neither the bounds nor the model provide a finite cap.
    pub fn new(model: &DelayModel, bounds: &MomentBounds, cost: f64) -> Option<Self> {
        let cap = bounds.cap.or_else(|| model.cap())?;
        let (_, gamma_ub) = gamma_bounds(bounds, cost);
        Some(Envelope {
            cap,
            gamma_ub,
            l_ub: cap + gamma_ub,
            d_lb: bounds.d_lb,
            mean: model.mean(),
            cost,
        })
    }

    fn numerator(&self) -> f64 {
        let v = self.l_ub * self.l_ub + self.cost;
        v * v
    }

    /// Bound on `E[(γ_k - γ*)²]`: `(L_ub² + C)² / (d_lb² k)`.
    pub fn gamma_mse(&self, k: u64) -> f64 {
        self.numerator() / (self.d_lb * self.d_lb * k as f64)
    }

    /// Leading constant `(L_ub² + C)² / (D̄ d_lb²)` of both regret bounds.
    pub fn regret_constant(&self) -> f64 {
        self.numerator() / (self.mean * self.d_lb * self.d_lb)
    }

    /// Bound on `h̄_K - h*`: constant × `(1 + ln K) / K`.
    pub fn average_regret(&self, k: u64) -> f64 {
        let kf = k as f64;
        self.regret_constant() * (1.0 + kf.ln()) / kf
    }

    /// Bound on `E[h_{π_K} - h*]`: constant × `1 / K`.
    pub fn policy_regret(&self, k: u64) -> f64 {
        self.regret_constant() / k as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretPoint {
    pub k: u64,
    /// `(γ_k - γ*)²`, for runs with a threshold.
    pub gamma_sq_err: Option<f64>,
    /// `Σ_{j≤k} (R_j - γ* L_j)`.
    pub reward_gap: f64,
    /// `Σ_{j≤k} (Y_j - h* L_j)`, so that `h̄_k - h* = delta / Σ L`.
    pub delta: f64,
    pub h_bar_gap: f64,
    pub gamma_mse_envelope: Option<f64>,
    pub average_regret_envelope: Option<f64>,
}

/// Per-checkpoint regret diagnostics for one traced run.
pub fn regret_diagnostics(
    trace: &[FrameRecord],
    gamma_star: f64,
    h_star: f64,
    cost: f64,
    envelope: Option<&Envelope>,
    at: &[u64],
) -> Vec<RegretPoint> {
    let mut out = Vec::with_capacity(at.len());
    let mut wanted = at.iter().copied().peekable();
    let (mut sum_l, mut sum_y, mut reward_gap) = (0.0, 0.0, 0.0);
    for f in trace {
        sum_l += f.l;
        sum_y += f.y;
        reward_gap += 0.5 * f.l * f.l + cost - gamma_star * f.l;
        while wanted.peek().is_some_and(|&k| k < f.k) {
            wanted.next();
        }
        if wanted.peek() == Some(&f.k) {
            wanted.next();
            out.push(RegretPoint {
                k: f.k,
                gamma_sq_err: f.gamma.map(|g| (g - gamma_star).powi(2)),
                reward_gap,
                delta: sum_y - h_star * sum_l,
                h_bar_gap: sum_y / sum_l - h_star,
                gamma_mse_envelope: envelope.map(|e| e.gamma_mse(f.k)),
                average_regret_envelope: envelope.map(|e| e.average_regret(f.k)),
            });
        }
    }
    out
}

pub const TRACE_CSV_HEADER: &str = "k,d,w,l,x,y,gamma,h_bar";

/// Writes a trace as CSV with columns `k,d,w,l,x,y,gamma,h_bar`.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &[FrameRecord]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    let (mut sum_y, mut sum_l) = (0.0, 0.0);
    for f in trace {
        sum_y += f.y;
        sum_l += f.l;
        let gamma = f.gamma.map(|g| g.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.k,
            f.d,
            f.w,
            f.l,
            f.x,
            f.y,
            gamma,
            sum_y / sum_l
        )?;
    }
    Ok(())
}
