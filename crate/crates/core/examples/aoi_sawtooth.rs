//! The age-of-information sawtooth behind the frame accounting.
//!
//! Rebuilds `A(t)` from a short trace and checks that the area under each
//! frame equals the per-frame cost `L_{k-1}·D_k + ½L_k²`.
//!
//! ```text
//! cargo run --example aoi_sawtooth
//! ```

use aoi_core::policy::FixedThreshold;
use aoi_core::sim::{frame_aoi_area, reconstruct_aoi_curve, run, RunConfig};
use aoi_core::DelayModel;

fn main() -> anyhow::Result<()> {
    let model = DelayModel::exponential(1.0)?;
    let mut policy = FixedThreshold::new(1.2)?;
    let out = run(&model, &mut policy, &RunConfig::new(6, 0.0, 5).with_trace())?;
    let trace = out.trace.expect("trace requested");
    let curve = reconstruct_aoi_curve(&trace);

    println!(
        "{:>3} {:>8} {:>8} {:>8} {:>10} {:>10}",
        "k", "start", "D", "W", "X_k", "integral"
    );
    let mut l_prev = 0.0;
    for (i, f) in trace.iter().enumerate() {
        println!(
            "{:>3} {:>8.4} {:>8.4} {:>8.4} {:>10.5} {:>10.5}",
            f.k,
            f.t_start,
            f.d,
            f.w,
            frame_aoi_area(l_prev, f.d, f.l),
            curve.frame_integral(i)
        );
        l_prev = f.l;
    }

    println!("\nvertices (t, A(t)):");
    for (t, a) in curve.vertices() {
        println!("  {t:.4}  {a:.4}");
    }
    println!(
        "\ntime-average AoI {:.5} = sum X / sum L = {:.5}",
        curve.time_average(),
        out.summary.sum_x / out.summary.sum_l
    );
    Ok(())
}
