//! Transmission-delay distributions and their censored moments.
//!
//! The solver only ever needs two functionals of the delay law:
//! `E[max{D, γ}]` and `E[max{D, γ}²]`. Closed forms are used for the
//! constant, uniform, exponential and lognormal families. The truncated
//! lognormal goes through adaptive quadrature split at the kink `d = γ`.
//! Empirical models use plug-in sample averages.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Smallest admissible probability mass below a truncation cap.
const MIN_TRUNCATED_MASS: f64 = 1e-3;

/// Serializable description of a delay law, as found in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySpec {
    Constant { d: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
    TruncatedLognormal { mu: f64, sigma: f64, cap: f64 },
    Empirical { samples: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayKind {
    Constant,
    Uniform,
    Exponential,
    Lognormal,
    TruncatedLognormal,
    Empirical,
}

#[derive(Clone, Debug)]
enum Sampler {
    Constant(f64),
    Uniform { a: f64, width: f64 },
    Exponential(Exp<f64>),
    Lognormal(LogNormal<f64>),
    Truncated { inner: LogNormal<f64>, cap: f64 },
    Empirical(Vec<f64>),
}

/// A validated delay distribution with cached first and second moments.
///
/// Immutable after construction; share it freely across threads.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DelaySpec", into = "DelaySpec")]
pub struct DelayModel {
    spec: DelaySpec,
    sampler: Sampler,
    mean: f64,
    second_moment: f64,
    /// Mass of the untruncated lognormal below the cap.
    truncated_mass: f64,
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn lognormal_pdf(d: f64, mu: f64, sigma: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let z = (d.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (d * sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl DelayModel {
    pub fn new(spec: DelaySpec) -> Result<Self> {
        let (sampler, mean, second_moment, truncated_mass) = match &spec {
            DelaySpec::Constant { d } => {
                positive("constant delay d", *d)?;
                (Sampler::Constant(*d), *d, d * d, 1.0)
            }
            DelaySpec::Uniform { a, b } => {
                finite("uniform a", *a)?;
                finite("uniform b", *b)?;
                if *a < 0.0 || b <= a {
                    return Err(Error::InvalidParameter(format!(
                        "uniform delay needs 0 <= a < b, got a={a}, b={b}"
                    )));
                }
                let mean = 0.5 * (a + b);
                let m2 = (a * a + a * b + b * b) / 3.0;
                (
                    Sampler::Uniform {
                        a: *a,
                        width: b - a,
                    },
                    mean,
                    m2,
                    1.0,
                )
            }
            DelaySpec::Exponential { rate } => {
                positive("exponential rate", *rate)?;
                let exp = Exp::new(*rate)
                    .map_err(|e| Error::InvalidParameter(format!("exponential: {e}")))?;
                (
                    Sampler::Exponential(exp),
                    1.0 / rate,
                    2.0 / (rate * rate),
                    1.0,
                )
            }
            DelaySpec::Lognormal { mu, sigma } => {
                finite("lognormal mu", *mu)?;
                positive("lognormal sigma", *sigma)?;
                let ln = LogNormal::new(*mu, *sigma)
                    .map_err(|e| Error::InvalidParameter(format!("lognormal: {e}")))?;
                let mean = (mu + 0.5 * sigma * sigma).exp();
                let m2 = (2.0 * mu + 2.0 * sigma * sigma).exp();
                (Sampler::Lognormal(ln), mean, m2, 1.0)
            }
            DelaySpec::TruncatedLognormal { mu, sigma, cap } => {
                finite("truncated lognormal mu", *mu)?;
                positive("truncated lognormal sigma", *sigma)?;
                positive("truncation cap", *cap)?;
                let mass = normal_cdf((cap.ln() - mu) / sigma);
                if mass < MIN_TRUNCATED_MASS {
                    return Err(Error::InvalidParameter(format!(
                        "truncation cap {cap} keeps only {mass:e} of the lognormal mass"
                    )));
                }
                let ln = LogNormal::new(*mu, *sigma)
                    .map_err(|e| Error::InvalidParameter(format!("lognormal: {e}")))?;
                // Moments are filled in below, once the model can integrate.
                (
                    Sampler::Truncated {
                        inner: ln,
                        cap: *cap,
                    },
                    f64::NAN,
                    f64::NAN,
                    mass,
                )
            }
            DelaySpec::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::InvalidParameter(
                        "empirical delay model needs at least one sample".into(),
                    ));
                }
                if let Some(bad) = samples.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                    return Err(Error::InvalidParameter(format!(
                        "empirical delays must be positive and finite, got {bad}"
                    )));
                }
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<f64>() / n;
                let m2 = samples.iter().map(|s| s * s).sum::<f64>() / n;
                (Sampler::Empirical(samples.clone()), mean, m2, 1.0)
            }
        };

        let mut model = DelayModel {
            spec,
            sampler,
            mean,
            second_moment,
            truncated_mass,
        };
        if model.kind() == DelayKind::TruncatedLognormal {
            let quad = Quadrature::default();
            model.mean = model.censored_moment_by_quadrature(0.0, 1, &quad)?;
            model.second_moment = model.censored_moment_by_quadrature(0.0, 2, &quad)?;
        }
        Ok(model)
    }

    pub fn constant(d: f64) -> Result<Self> {
        Self::new(DelaySpec::Constant { d })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(DelaySpec::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(DelaySpec::Exponential { rate })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(DelaySpec::Lognormal { mu, sigma })
    }

    pub fn truncated_lognormal(mu: f64, sigma: f64, cap: f64) -> Result<Self> {
        Self::new(DelaySpec::TruncatedLognormal { mu, sigma, cap })
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        Self::new(DelaySpec::Empirical { samples })
    }

    pub fn spec(&self) -> &DelaySpec {
        &self.spec
    }

    pub fn kind(&self) -> DelayKind {
        match self.spec {
            DelaySpec::Constant { .. } => DelayKind::Constant,
            DelaySpec::Uniform { .. } => DelayKind::Uniform,
            DelaySpec::Exponential { .. } => DelayKind::Exponential,
            DelaySpec::Lognormal { .. } => DelayKind::Lognormal,
            DelaySpec::TruncatedLognormal { .. } => DelayKind::TruncatedLognormal,
            DelaySpec::Empirical { .. } => DelayKind::Empirical,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Essential supremum of the delay, when finite.
    pub fn cap(&self) -> Option<f64> {
        match &self.spec {
            DelaySpec::Constant { d } => Some(*d),
            DelaySpec::Uniform { b, .. } => Some(*b),
            DelaySpec::TruncatedLognormal { cap, .. } => Some(*cap),
            DelaySpec::Empirical { samples } => samples.iter().copied().reduce(f64::max),
            DelaySpec::Exponential { .. } | DelaySpec::Lognormal { .. } => None,
        }
    }

    /// Essential infimum of the delay. Below it `max{D, γ} = D` almost surely.
    fn floor(&self) -> f64 {
        match &self.spec {
            DelaySpec::Constant { d } => *d,
            DelaySpec::Uniform { a, .. } => *a,
            DelaySpec::Empirical { samples } => {
                samples.iter().copied().fold(f64::INFINITY, f64::min)
            }
            _ => 0.0,
        }
    }

    /// Draws one delay.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.sampler {
            Sampler::Constant(d) => *d,
            // 1 - U lies in (0, 1], which keeps a zero lower edge off the support.
            Sampler::Uniform { a, width } => a + width * (1.0 - rng.random::<f64>()),
            Sampler::Exponential(exp) => loop {
                let d = exp.sample(rng);
                if d > 0.0 {
                    break d;
                }
            },
            Sampler::Lognormal(ln) => ln.sample(rng),
            Sampler::Truncated { inner, cap } => loop {
                let d = inner.sample(rng);
                if d <= *cap {
                    break d;
                }
            },
            Sampler::Empirical(samples) => samples[rng.random_range(0..samples.len())],
        }
    }

    /// Probability density, for the absolutely continuous families.
    pub fn density(&self, d: f64) -> Option<f64> {
        match &self.spec {
            DelaySpec::Constant { .. } | DelaySpec::Empirical { .. } => None,
            DelaySpec::Uniform { a, b } => Some(if d >= *a && d <= *b {
                1.0 / (b - a)
            } else {
                0.0
            }),
            DelaySpec::Exponential { rate } => Some(if d >= 0.0 {
                rate * (-rate * d).exp()
            } else {
                0.0
            }),
            DelaySpec::Lognormal { mu, sigma } => Some(lognormal_pdf(d, *mu, *sigma)),
            DelaySpec::TruncatedLognormal { mu, sigma, cap } => Some(if d <= *cap {
                lognormal_pdf(d, *mu, *sigma) / self.truncated_mass
            } else {
                0.0
            }),
        }
    }

    /// `E[max{D, γ}]`.
    pub fn e_max(&self, gamma: f64) -> Result<f64> {
        self.censored_moment(gamma, 1)
    }

    /// `E[max{D, γ}²]`.
    pub fn e_max_sq(&self, gamma: f64) -> Result<f64> {
        self.censored_moment(gamma, 2)
    }

    fn censored_moment(&self, gamma: f64, power: i32) -> Result<f64> {
        check_gamma(gamma)?;
        if gamma <= self.floor() {
            return Ok(if power == 1 {
                self.mean
            } else {
                self.second_moment
            });
        }
        if self.cap().is_some_and(|c| gamma >= c) {
            return Ok(gamma.powi(power));
        }
        let g = gamma;
        let value = match &self.spec {
            DelaySpec::Constant { d } => d.max(g).powi(power),
            DelaySpec::Uniform { a, b } => {
                if g >= *b {
                    g.powi(power)
                } else {
                    let width = b - a;
                    let below = g.powi(power) * (g - a);
                    let above = match power {
                        1 => 0.5 * (b * b - g * g),
                        _ => (b * b * b - g * g * g) / 3.0,
                    };
                    (below + above) / width
                }
            }
            DelaySpec::Exponential { rate } => {
                let tail = (-rate * g).exp();
                match power {
                    1 => g + tail / rate,
                    _ => g * g + tail * (2.0 * g / rate + 2.0 / (rate * rate)),
                }
            }
            DelaySpec::Lognormal { mu, sigma } => lognormal_censored_moment(*mu, *sigma, g, power),
            DelaySpec::TruncatedLognormal { .. } => {
                return self.censored_moment_by_quadrature(g, power, &Quadrature::default());
            }
            DelaySpec::Empirical { samples } => {
                samples.iter().map(|s| s.max(g).powi(power)).sum::<f64>() / samples.len() as f64
            }
        };
        Ok(value)
    }

    /// `E[max{D, γ}^power]` by integrating the density on `(0, γ]` and
    /// `(γ, sup D)` separately; the unbounded tail uses a variable change.
    ///
    /// Available for every family with a density, so closed forms can be
    /// cross-checked against it.
    pub fn censored_moment_by_quadrature(
        &self,
        gamma: f64,
        power: i32,
        quad: &Quadrature,
    ) -> Result<f64> {
        check_gamma(gamma)?;
        if self.density(1.0).is_none() {
            return Err(Error::InvalidParameter(format!(
                "{:?} delay has no density to integrate",
                self.kind()
            )));
        }
        let pdf = |d: f64| self.density(d).unwrap_or(0.0);
        let lo = self.floor();
        let below = if gamma > lo {
            let upper = self.cap().map_or(gamma, |c| c.min(gamma));
            gamma.powi(power) * quad.integrate(pdf, lo, upper)?
        } else {
            0.0
        };
        let start = gamma.max(lo);
        let above = match self.cap() {
            Some(c) if start >= c => 0.0,
            Some(c) => quad.integrate(|d| d.powi(power) * pdf(d), start, c)?,
            None => quad.integrate_to_infinity(|d| d.powi(power) * pdf(d), start)?,
        };
        Ok(below + above)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold must be finite and non-negative, got {gamma}"
        )))
    }
}

/// `E[max{D, γ}^p]` for `D ~ LogNormal(μ, σ)`, using
/// `E[D^p 1{D > γ}] = exp(pμ + p²σ²/2) Φ((μ + pσ² - ln γ) / σ)`.
fn lognormal_censored_moment(mu: f64, sigma: f64, gamma: f64, power: i32) -> f64 {
    let p = f64::from(power);
    let lg = gamma.ln();
    let below = gamma.powi(power) * normal_cdf((lg - mu) / sigma);
    let above = (p * mu + 0.5 * p * p * sigma * sigma).exp()
        * normal_cdf((mu + p * sigma * sigma - lg) / sigma);
    below + above
}

impl TryFrom<DelaySpec> for DelayModel {
    type Error = Error;

    fn try_from(spec: DelaySpec) -> Result<Self> {
        DelayModel::new(spec)
    }
}

impl From<DelayModel> for DelaySpec {
    fn from(model: DelayModel) -> Self {
        model.spec
    }
}

impl PartialEq for DelayModel {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl fmt::Display for DelayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.spec {
            DelaySpec::Constant { d } => write!(f, "constant:{d}"),
            DelaySpec::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
            DelaySpec::Exponential { rate } => write!(f, "exponential:{rate}"),
            DelaySpec::Lognormal { mu, sigma } => write!(f, "lognormal:{mu},{sigma}"),
            DelaySpec::TruncatedLognormal { mu, sigma, cap } => {
                write!(f, "truncated_lognormal:{mu},{sigma},{cap}")
            }
            DelaySpec::Empirical { samples } => write!(f, "empirical:{} samples", samples.len()),
        }
    }
}

/// Parses the compact CLI form, e.g. `lognormal:1,1.5` or
/// `truncated_lognormal:1,1.5,50`.
impl FromStr for DelayModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let values = args
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse `{p}` in delay model `{s}`"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let arity = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "delay model `{kind}` takes {n} parameter(s), got {}",
                    values.len()
                )))
            }
        };
        let spec = match kind.trim() {
            "constant" | "const" => {
                arity(1)?;
                DelaySpec::Constant { d: values[0] }
            }
            "uniform" => {
                arity(2)?;
                DelaySpec::Uniform {
                    a: values[0],
                    b: values[1],
                }
            }
            "exponential" | "exp" => {
                arity(1)?;
                DelaySpec::Exponential { rate: values[0] }
            }
            "lognormal" => {
                arity(2)?;
                DelaySpec::Lognormal {
                    mu: values[0],
                    sigma: values[1],
                }
            }
            "truncated_lognormal" => {
                arity(3)?;
                DelaySpec::TruncatedLognormal {
                    mu: values[0],
                    sigma: values[1],
                    cap: values[2],
                }
            }
            "empirical" => DelaySpec::Empirical { samples: values },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown delay model `{other}`"
                )))
            }
        };
        DelayModel::new(spec)
    }
}

/// A-priori knowledge about the delay available to the online sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBounds {
    pub d_lb: f64,
    pub d_ub: f64,
    pub m_lb: f64,
    pub m_ub: f64,
    /// Hard cap on the delay, if one is known.
    #[serde(rename = "b", default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl MomentBounds {
    pub fn new(d_lb: f64, d_ub: f64, m_lb: f64, m_ub: f64, cap: Option<f64>) -> Result<Self> {
        let bounds = MomentBounds {
            d_lb,
            d_ub,
            m_lb,
            m_ub,
            cap,
        };
        bounds.check()?;
        Ok(bounds)
    }

    /// Tight bounds: the model's own moments and support cap.
    pub fn exact(model: &DelayModel) -> Self {
        MomentBounds {
            d_lb: model.mean(),
            d_ub: model.mean(),
            m_lb: model.second_moment(),
            m_ub: model.second_moment(),
            cap: model.cap(),
        }
    }

    /// Internal consistency of the bounds themselves.
    pub fn check(&self) -> Result<()> {
        let all_finite = [self.d_lb, self.d_ub, self.m_lb, self.m_ub]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.d_lb <= 0.0 || self.m_lb <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "moment bounds must be positive and finite: {self:?}"
            )));
        }
        if self.d_lb > self.d_ub || self.m_lb > self.m_ub {
            return Err(Error::InvalidParameter(format!(
                "lower moment bound exceeds upper bound: {self:?}"
            )));
        }
        if self.d_lb * self.d_lb > self.m_ub {
            return Err(Error::InvalidParameter(format!(
                "d_lb^2 = {} exceeds m_ub = {}",
                self.d_lb * self.d_lb,
                self.m_ub
            )));
        }
        if let Some(b) = self.cap {
            if !(b.is_finite() && b >= self.d_ub) {
                return Err(Error::InvalidParameter(format!(
                    "delay cap {b} must be finite and at least d_ub = {}",
                    self.d_ub
                )));
            }
        }
        Ok(())
    }
}

/// One violated inequality between a model and its declared bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated ({} vs {})",
            self.inequality, self.lhs, self.rhs
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub violations: Vec<BoundViolation>,
    /// Set for empirical models, whose moments are only estimates.
    pub advisory: bool,
}

impl BoundsReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the model's moments and support respect `bounds`.
pub fn validate_bounds(model: &DelayModel, bounds: &MomentBounds) -> BoundsReport {
    let mut violations = Vec::new();
    let mut require = |holds: bool, inequality: &str, lhs: f64, rhs: f64| {
        if !holds {
            violations.push(BoundViolation {
                inequality: inequality.to_string(),
                lhs,
                rhs,
            });
        }
    };
    let (mean, m2) = (model.mean(), model.second_moment());
    require(bounds.d_lb <= mean, "d_lb <= mean", bounds.d_lb, mean);
    require(mean <= bounds.d_ub, "mean <= d_ub", mean, bounds.d_ub);
    require(bounds.m_lb <= m2, "m_lb <= second_moment", bounds.m_lb, m2);
    require(m2 <= bounds.m_ub, "second_moment <= m_ub", m2, bounds.m_ub);
    if let Some(b) = bounds.cap {
        require(bounds.d_ub <= b, "d_ub <= b", bounds.d_ub, b);
        match model.cap() {
            Some(sup) => require(sup <= b, "delay support <= b", sup, b),
            None => require(false, "delay support <= b", f64::INFINITY, b),
        }
    }
    BoundsReport {
        violations,
        advisory: model.kind() == DelayKind::Empirical,
    }
}
