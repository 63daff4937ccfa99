use serde::{Deserialize, Serialize};

/// Normal quantile used for the 95% intervals.
pub const Z_95: f64 = 1.96;

/// Mean, sample standard deviation and a normal-approximation 95% interval
/// `mean ± 1.96·std/√n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Fewer than two samples: the interval has zero width.
    pub degenerate: bool,
}

impl SampleStats {
    pub fn from_slice(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return SampleStats {
                n,
                mean: f64::NAN,
                std: f64::NAN,
                ci_lo: f64::NAN,
                ci_hi: f64::NAN,
                degenerate: true,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half = Z_95 * std / (n as f64).sqrt();
        SampleStats {
            n,
            mean,
            std,
            ci_lo: mean - half,
            ci_hi: mean + half,
            degenerate: n < 2,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std / (self.n as f64).sqrt()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }
}
