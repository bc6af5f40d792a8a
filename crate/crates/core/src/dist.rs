//! Probability primitives: the standard normal CDF and the distribution of the
//! ideal dot product.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Standard normal CDF, `Φ(x)`.
///
/// Evaluated through `erfc` so that both tails keep full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)
}

/// `Φ(offset / sigma)`, extended to `sigma = 0` by its limit: the unit step
/// with value `0.5` at `offset = 0`.
pub fn scaled_cdf(offset: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        std_normal_cdf(offset / sigma)
    } else if offset > 0.0 {
        1.0
    } else if offset < 0.0 {
        0.0
    } else {
        0.5
    }
}

// Relative distance below which a threshold and a noiseless input count as
// equal, so that values that coincide in exact arithmetic get the tie value
// whatever the rounding.
const TIE_REL: f64 = 1e-12;

/// `P(v + η < t)` for `η ~ N(0, sigma²)`, i.e. `Φ((t − v)/sigma)`; with no
/// noise a tie (up to rounding) has probability `0.5`.
pub fn below_prob(t: f64, v: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        return std_normal_cdf((t - v) / sigma);
    }
    let d = t - v;
    if d == 0.0 || (d.is_finite() && d.abs() <= TIE_REL * t.abs().max(v.abs())) {
        0.5
    } else if d > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `P(lo <= center + η < hi)` for `η ~ N(0, sigma²)`.
///
/// Differences are taken on whichever side of the mean keeps both CDF values
/// small, so cells deep in either tail do not cancel to zero.
pub fn interval_prob(lo: f64, hi: f64, center: f64, sigma: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    // P(V >= t) = Φ((center − t)/σ) = below_prob(center, t, σ)
    let p = if lo >= center {
        below_prob(center, lo, sigma) - below_prob(center, hi, sigma)
    } else {
        below_prob(hi, center, sigma) - below_prob(lo, center, sigma)
    };
    p.max(0.0)
}

/// Probability mass function of the ideal dot product over `{0, ..., N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DotProductPmf {
    probs: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-12;

impl DotProductPmf {
    /// Wraps an explicit PMF. Entries must be finite, nonnegative and sum to
    /// one within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("pmf must have at least one entry"));
        }
        if let Some(bad) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(format!(
                "pmf entry {bad} is {} (must be finite and >= 0)",
                probs[bad]
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("pmf sums to {sum}, expected 1")));
        }
        Ok(DotProductPmf { probs })
    }

    /// Builds a PMF from nonnegative weights by normalizing them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(format!(
                "pmf weight {bad} is {} (must be finite and >= 0)",
                weights[bad]
            )));
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::invalid("pmf weights sum to zero"));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// All mass at `y`, with support `{0, ..., n_max}`.
    pub fn point_mass(n_max: usize, y: usize) -> Result<Self> {
        if y > n_max {
            return Err(Error::invalid(format!("point mass at {y} exceeds N = {n_max}")));
        }
        let mut probs = vec![0.0; n_max + 1];
        probs[y] = 1.0;
        Ok(DotProductPmf { probs })
    }

    /// `Bi(n, p)`, computed by the multiplicative recurrence from the mode
    /// outwards and then normalized. Stable for `n` in the thousands.
    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("binomial p = {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Self::point_mass(n, 0);
        }
        if p == 1.0 {
            return Self::point_mass(n, n);
        }
        let odds = p / (1.0 - p);
        let mode = (libm::floor((n + 1) as f64 * p) as usize).min(n);
        let mut w = vec![0.0; n + 1];
        w[mode] = 1.0;
        for k in mode..n {
            w[k + 1] = w[k] * (n - k) as f64 / (k + 1) as f64 * odds;
        }
        for k in (1..=mode).rev() {
            w[k - 1] = w[k] * k as f64 / (n - k + 1) as f64 / odds;
        }
        let sum: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= sum);
        Ok(DotProductPmf { probs: w })
    }

    /// Maximum dot-product value `N`.
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(y, p(y))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate()
    }

    /// Mean and variance of `y_ideal`.
    pub fn moments(&self) -> (f64, f64) {
        let mean: f64 = self.iter().map(|(y, p)| y as f64 * p).sum();
        let var: f64 = self
            .iter()
            .map(|(y, p)| {
                let d = y as f64 - mean;
                d * d * p
            })
            .sum();
        (mean, var.max(0.0))
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    /// CDF at integer `y` (inclusive).
    pub fn cdf(&self, y: usize) -> f64 {
        self.probs.iter().take(y + 1).sum::<f64>().min(1.0)
    }
}

/// Mean and variance of a dot-product PMF.
pub fn pmf_moments(pmf: &DotProductPmf) -> (f64, f64) {
    pmf.moments()
}

/// Shorthand for [`DotProductPmf::binomial`].
pub fn binomial_pmf(n: usize, p: f64) -> Result<DotProductPmf> {
    DotProductPmf::binomial(n, p)
}
