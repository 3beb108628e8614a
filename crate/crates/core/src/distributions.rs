//! Gaussian primitives and the truncated-then-noised feature density.
//!
//! A class-`c` feature `f ~ N(mu, sd^2)` is kept only when `f >= tau`. Internal noise
//! `N(0, sigma^2)` is then added to the kept value. The resulting density has the closed
//! form
//!
//! ```text
//! p(e) = N(e; mu, sd^2 + sigma^2) * Phi((e - a) / b) / Phi((mu - tau) / sd)
//! a    = (tau * (sd^2 + sigma^2) - sigma^2 * mu) / sd^2
//! b    = (sigma / sd) * sqrt(sd^2 + sigma^2)
//! ```
//!
//! With `sigma == 0` the `Phi` factor collapses to a step at `tau`, so that case is
//! evaluated as a plain truncated normal instead.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use crate::error::{domain, Error, Result};

/// `ln(sqrt(2 * pi))`
pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Acceptance probabilities below this cannot be renormalized.
pub const MIN_ACCEPTANCE: f64 = 1e-300;

/// Binary class label: `Negative` is `c = 0`, `Positive` is `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Negative,
    Positive,
}

impl Class {
    pub fn index(self) -> usize {
        match self {
            Class::Negative => 0,
            Class::Positive => 1,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Negative => f.write_str("negative"),
            Class::Positive => f.write_str("positive"),
        }
    }
}

/// Independent Gaussian external-source parameters for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassParams {
    class: Class,
    means: Vec<f64>,
    stddevs: Vec<f64>,
}

impl ClassParams {
    pub fn new(class: Class, means: Vec<f64>, stddevs: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return domain("a class needs at least one feature");
        }
        if means.len() != stddevs.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                got: stddevs.len(),
            });
        }
        if let Some(m) = means.iter().find(|m| !m.is_finite()) {
            return domain(format!("feature mean must be finite, got {m}"));
        }
        if let Some(s) = stddevs.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return domain(format!(
                "feature standard deviation must be finite and positive, got {s}"
            ));
        }
        Ok(Self {
            class,
            means,
            stddevs,
        })
    }

    /// `dim` identically distributed features.
    pub fn iid(class: Class, mean: f64, stddev: f64, dim: usize) -> Result<Self> {
        Self::new(class, vec![mean; dim], vec![stddev; dim])
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stddevs(&self) -> &[f64] {
        &self.stddevs
    }

    pub(crate) fn with_class(mut self, class: Class) -> Self {
        self.class = class;
        self
    }
}

/// Standard deviation of the additive internal (processing) noise. Zero is the
/// noiseless observer.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InternalNoise(f64);

impl InternalNoise {
    pub const NONE: InternalNoise = InternalNoise(0.0);

    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return domain(format!(
                "internal noise must be finite and nonnegative, got {sigma}"
            ));
        }
        Ok(Self(sigma))
    }

    pub fn sigma(self) -> f64 {
        self.0
    }

    pub fn is_noiseless(self) -> bool {
        self.0 == 0.0
    }
}

pub fn normal_pdf(x: f64, mu: f64, var: f64) -> Result<f64> {
    if !(x.is_finite() && mu.is_finite() && var.is_finite()) {
        return domain("normal_pdf arguments must be finite");
    }
    if var <= 0.0 {
        return domain(format!("variance must be positive, got {var}"));
    }
    Ok(normal_logpdf(x, mu, var).exp())
}

#[inline]
pub(crate) fn normal_logpdf(x: f64, mu: f64, var: f64) -> f64 {
    let d = x - mu;
    -0.5 * d * d / var - 0.5 * var.ln() - LN_SQRT_2PI
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("normal_cdf argument must be finite, got {x}"));
    }
    Ok(phi(x))
}

/// Natural log of the standard normal CDF. Accepts infinities.
pub fn log_normal_cdf(x: f64) -> Result<f64> {
    if x.is_nan() {
        return domain("log_normal_cdf argument is NaN");
    }
    Ok(log_phi(x))
}

#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Phi(x)`, finite for every finite `x`.
pub(crate) fn log_phi(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if x < -8.0 {
        log_phi_lower_tail(x)
    } else if x > 0.0 {
        (-phi(-x)).ln_1p()
    } else {
        phi(x).ln()
    }
}

/// Asymptotic expansion of the Mills ratio:
/// `Phi(x) ~ phi(x)/(-x) * sum_k (-1)^k (2k-1)!! / x^(2k)`.
fn log_phi_lower_tail(x: f64) -> f64 {
    let inv_x2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        let next = -term * (2 * k - 1) as f64 * inv_x2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        sum += next;
        term = next;
    }
    -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + sum.ln()
}

/// Probability that feature `i` of `params` survives threshold `tau_i`.
///
/// Panics if `i` is out of range.
pub fn acceptance_prob(params: &ClassParams, i: usize, tau_i: f64) -> f64 {
    if tau_i == f64::NEG_INFINITY {
        return 1.0;
    }
    phi((params.means[i] - tau_i) / params.stddevs[i])
}

/// Density of one extracted feature value after truncation and internal noise, with
/// its normalizing constants precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNoisedDensity {
    mean: f64,
    stddev: f64,
    tau: f64,
    sigma: f64,
    total_var: f64,
    a: f64,
    b: f64,
    log_acceptance: f64,
}

impl TruncatedNoisedDensity {
    pub fn new(mean: f64, stddev: f64, tau: f64, noise: InternalNoise) -> Result<Self> {
        if !(mean.is_finite() && stddev.is_finite() && stddev > 0.0) {
            return domain("truncated density needs a finite mean and positive stddev");
        }
        if tau.is_nan() || tau == f64::INFINITY {
            return domain(format!("threshold must be finite or -inf, got {tau}"));
        }
        let sigma = noise.sigma();
        let var_c = stddev * stddev;
        let total_var = var_c + sigma * sigma;
        let log_acceptance = if tau == f64::NEG_INFINITY {
            0.0
        } else {
            log_phi((mean - tau) / stddev)
        };
        let (a, b) = if tau == f64::NEG_INFINITY || sigma == 0.0 {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (
                (tau * total_var - sigma * sigma * mean) / var_c,
                sigma / stddev * total_var.sqrt(),
            )
        };
        Ok(Self {
            mean,
            stddev,
            tau,
            sigma,
            total_var,
            a,
            b,
            log_acceptance,
        })
    }

    pub fn acceptance(&self) -> f64 {
        self.log_acceptance.exp()
    }

    pub fn log_acceptance(&self) -> f64 {
        self.log_acceptance
    }

    pub fn is_degenerate(&self) -> bool {
        self.log_acceptance < MIN_ACCEPTANCE.ln()
    }

    /// Log density at `e`. Returns `-inf` below the threshold in the noiseless case.
    #[inline]
    pub fn ln_pdf(&self, e: f64) -> f64 {
        if self.tau == f64::NEG_INFINITY {
            return normal_logpdf(e, self.mean, self.total_var);
        }
        if self.sigma == 0.0 {
            if e < self.tau {
                return f64::NEG_INFINITY;
            }
            return normal_logpdf(e, self.mean, self.total_var) - self.log_acceptance;
        }
        normal_logpdf(e, self.mean, self.total_var) + log_phi((e - self.a) / self.b)
            - self.log_acceptance
    }

    /// Lower and upper points beyond which the density mass is negligible.
    pub(crate) fn effective_support(&self, width: f64) -> (f64, f64) {
        let body_lo = (self.mean - width * self.stddev).max(self.tau);
        let body_hi = self.mean.max(self.tau) + width * self.stddev;
        let lo = if self.sigma == 0.0 {
            body_lo
        } else {
            body_lo - width * self.sigma
        };
        (lo, body_hi + width * self.sigma)
    }

    pub fn stddev(&self) -> f64 {
        self.stddev
    }

    pub fn noise_sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// Log density of extracted feature `i` under `params` after truncation at `tau_i` and
/// internal noise `noise`.
pub fn truncated_noised_logpdf(
    e_i: f64,
    params: &ClassParams,
    i: usize,
    tau_i: f64,
    noise: InternalNoise,
) -> Result<f64> {
    if i >= params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: i + 1,
        });
    }
    let density = TruncatedNoisedDensity::new(params.means[i], params.stddevs[i], tau_i, noise)?;
    if density.is_degenerate() {
        return Err(Error::DegenerateTruncation {
            feature: i,
            class: params.class,
            acceptance: density.acceptance(),
        });
    }
    if e_i.is_nan() {
        return domain("feature value is NaN");
    }
    Ok(density.ln_pdf(e_i))
}

/// `1 / sqrt(2 pi var)`, the peak height of a normal density.
pub fn normal_peak(var: f64) -> f64 {
    1.0 / (2.0 * PI * var).sqrt()
}
