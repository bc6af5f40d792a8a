//! Scalar quantizer models and the SQNR-oriented baseline designs.
//!
//! Thresholds `t_1..t_M` and levels `r_0..r_M` follow the usual ADC
//! convention: an input maps to `r_k` when `t_k <= v < t_{k+1}`, to `r_0` below
//! `t_1` and to `r_M` at or above `t_M`.

use alloc::format;
use alloc::vec::Vec;

use crate::dist::{interval_prob, std_normal_pdf};
use crate::error::{Error, Result};
use crate::ratio_db;

/// Largest supported ADC precision.
pub const MAX_BITS: u32 = 20;

fn check_bits(b_adc: u32) -> Result<()> {
    if b_adc == 0 || b_adc > MAX_BITS {
        return Err(Error::invalid(format!("b_adc = {b_adc} outside 1..={MAX_BITS}")));
    }
    Ok(())
}

/// Number of thresholds `M = 2^B - 1` of a `B`-bit ADC.
pub fn threshold_count(b_adc: u32) -> usize {
    (1usize << b_adc) - 1
}

/// Uniform ADC described by its lowest threshold and step size.
///
/// `t_k = t1 + (k-1)·Δ` for `k = 1..M` and `r_k = t1 + (k-0.5)·Δ` for
/// `k = 0..M`. The clipping threshold `t_M` is derived, which keeps the
/// one-bit case (a single threshold) well defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAdc {
    b_adc: u32,
    t1: f64,
    delta_adc: f64,
}

impl UniformAdc {
    pub fn new(b_adc: u32, t1: f64, delta_adc: f64) -> Result<Self> {
        check_bits(b_adc)?;
        if !t1.is_finite() {
            return Err(Error::invalid(format!("t1 = {t1} is not finite")));
        }
        if !(delta_adc > 0.0 && delta_adc.is_finite()) {
            return Err(Error::invalid(format!("delta_adc = {delta_adc} must be > 0")));
        }
        Ok(UniformAdc { b_adc, t1, delta_adc })
    }

    /// Builds the ADC from its two clipping thresholds. Needs `B >= 2`.
    pub fn from_clipping(b_adc: u32, t1: f64, t_m: f64) -> Result<Self> {
        check_bits(b_adc)?;
        let m = threshold_count(b_adc);
        if m < 2 {
            return Err(Error::invalid("a 1-bit ADC has a single threshold; use new()"));
        }
        Self::new(b_adc, t1, (t_m - t1) / (m - 1) as f64)
    }

    pub fn b_adc(&self) -> u32 {
        self.b_adc
    }

    /// Number of thresholds `M`.
    pub fn m(&self) -> usize {
        threshold_count(self.b_adc)
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn delta_adc(&self) -> f64 {
        self.delta_adc
    }

    /// Largest threshold `t_M`.
    pub fn t_m(&self) -> f64 {
        self.threshold(self.m())
    }

    /// Threshold `t_k`, `1 <= k <= M`.
    #[inline]
    pub fn threshold(&self, k: usize) -> f64 {
        self.t1 + (k as f64 - 1.0) * self.delta_adc
    }

    /// Level `r_k`, `0 <= k <= M`.
    #[inline]
    pub fn level(&self, k: usize) -> f64 {
        self.t1 + (k as f64 - 0.5) * self.delta_adc
    }

    pub fn thresholds(&self) -> Vec<f64> {
        (1..=self.m()).map(|k| self.threshold(k)).collect()
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..=self.m()).map(|k| self.level(k)).collect()
    }

    /// Index of the output level for input `v`, i.e. the number of
    /// thresholds `<= v`.
    #[inline]
    pub fn index(&self, v: f64) -> usize {
        let m = self.m();
        if v < self.t1 {
            return 0;
        }
        let raw = libm::floor((v - self.t1) / self.delta_adc) + 1.0;
        let mut k = if raw >= m as f64 { m } else { raw as usize };
        // settle rounding at the cell edges against the thresholds themselves
        while k < m && v >= self.threshold(k + 1) {
            k += 1;
        }
        while k > 0 && v < self.threshold(k) {
            k -= 1;
        }
        k
    }

    #[inline]
    pub fn quantize(&self, v: f64) -> f64 {
        self.level(self.index(v))
    }

    pub fn to_general(&self) -> GeneralAdc {
        GeneralAdc {
            thresholds: self.thresholds(),
            levels: self.levels(),
        }
    }
}

/// Quantizer with arbitrary sorted thresholds and levels.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralAdc {
    thresholds: Vec<f64>,
    levels: Vec<f64>,
}

impl GeneralAdc {
    pub fn new(thresholds: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        let m = thresholds.len();
        if m == 0 {
            return Err(Error::invalid("quantizer needs at least one threshold"));
        }
        if levels.len() != m + 1 {
            return Err(Error::invalid(format!(
                "{m} thresholds need {} levels, got {}",
                m + 1,
                levels.len()
            )));
        }
        if thresholds.iter().chain(&levels).any(|x| !x.is_finite()) {
            return Err(Error::invalid("thresholds and levels must be finite"));
        }
        if thresholds.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("thresholds must be non-decreasing"));
        }
        if levels[0] >= thresholds[0] {
            return Err(Error::invalid("r_0 must lie below t_1"));
        }
        for k in 1..m {
            if !(thresholds[k - 1] <= levels[k] && levels[k] < thresholds[k]) {
                return Err(Error::invalid(format!("level r_{k} outside [t_{k}, t_{})", k + 1)));
            }
        }
        if levels[m] < thresholds[m - 1] {
            return Err(Error::invalid("r_M must lie at or above t_M"));
        }
        Ok(GeneralAdc { thresholds, levels })
    }

    pub fn m(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn index(&self, v: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= v)
    }

    pub fn quantize(&self, v: f64) -> f64 {
        self.levels[self.index(v)]
    }

    /// Applies `v -> shift + scale·v` to every threshold and level.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::invalid("affine scale must be > 0"));
        }
        Self::new(
            self.thresholds.iter().map(|t| shift + scale * t).collect(),
            self.levels.iter().map(|r| shift + scale * r).collect(),
        )
    }
}

/// Either kind of ADC.
#[derive(Debug, Clone, PartialEq)]
pub enum Adc {
    Uniform(UniformAdc),
    General(GeneralAdc),
}

impl Adc {
    pub fn m(&self) -> usize {
        match self {
            Adc::Uniform(a) => a.m(),
            Adc::General(a) => a.m(),
        }
    }

    #[inline]
    pub fn index(&self, v: f64) -> usize {
        match self {
            Adc::Uniform(a) => a.index(v),
            Adc::General(a) => a.index(v),
        }
    }

    #[inline]
    pub fn quantize(&self, v: f64) -> f64 {
        match self {
            Adc::Uniform(a) => a.quantize(v),
            Adc::General(a) => a.quantize(v),
        }
    }

    pub fn threshold(&self, k: usize) -> f64 {
        match self {
            Adc::Uniform(a) => a.threshold(k),
            Adc::General(a) => a.thresholds[k - 1],
        }
    }

    pub fn level(&self, k: usize) -> f64 {
        match self {
            Adc::Uniform(a) => a.level(k),
            Adc::General(a) => a.levels[k],
        }
    }

    /// Lower and upper edge of cell `k` (the input range mapped to `r_k`).
    pub fn cell(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { f64::NEG_INFINITY } else { self.threshold(k) };
        let hi = if k == self.m() { f64::INFINITY } else { self.threshold(k + 1) };
        (lo, hi)
    }

    pub fn as_uniform(&self) -> Option<&UniformAdc> {
        match self {
            Adc::Uniform(a) => Some(a),
            Adc::General(_) => None,
        }
    }

    pub fn to_general(&self) -> GeneralAdc {
        match self {
            Adc::Uniform(a) => a.to_general(),
            Adc::General(a) => a.clone(),
        }
    }
}

impl From<UniformAdc> for Adc {
    fn from(a: UniformAdc) -> Self {
        Adc::Uniform(a)
    }
}

impl From<GeneralAdc> for Adc {
    fn from(a: GeneralAdc) -> Self {
        Adc::General(a)
    }
}

/// A normal input `N(mean, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub sigma: f64,
}

impl Gaussian {
    pub fn new(mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite() && mean.is_finite()) {
            return Err(Error::invalid(format!("gaussian sigma = {sigma} must be >= 0")));
        }
        Ok(Gaussian { mean, sigma })
    }
}

/// `E[(r - V)² · 1{lo <= V < hi}]` for `V ~ N(mean, sigma²)`, in closed form
/// from the truncated first and second moments of the normal.
pub(crate) fn cell_squared_error(r: f64, lo: f64, hi: f64, mean: f64, sigma: f64) -> f64 {
    let p = interval_prob(lo, hi, mean, sigma);
    if p == 0.0 {
        return 0.0;
    }
    let za = (lo - mean) / sigma;
    let zb = (hi - mean) / sigma;
    let (pa, pb) = (std_normal_pdf(za), std_normal_pdf(zb));
    // z·φ(z) -> 0 at infinite edges
    let za_pa = if za.is_finite() { za * pa } else { 0.0 };
    let zb_pb = if zb.is_finite() { zb * pb } else { 0.0 };
    let first = pa - pb;
    let second = p + za_pa - zb_pb;
    let u = r - mean;
    (u * u * p - 2.0 * u * sigma * first + sigma * sigma * second).max(0.0)
}

/// Mean squared quantization error `E[(Q(V) - V)²]` of a Gaussian input.
pub fn gaussian_mse_q(adc: &Adc, input: Gaussian) -> f64 {
    if input.sigma == 0.0 {
        let e = adc.quantize(input.mean) - input.mean;
        return e * e;
    }
    (0..=adc.m())
        .map(|k| {
            let (lo, hi) = adc.cell(k);
            cell_squared_error(adc.level(k), lo, hi, input.mean, input.sigma)
        })
        .sum()
}

/// SQNR of a Gaussian input in dB (`+∞` when the error vanishes).
pub fn gaussian_sqnr_db(adc: &Adc, input: Gaussian) -> f64 {
    ratio_db(input.sigma * input.sigma, gaussian_mse_q(adc, input))
}

/// Full-range uniform ADC: the `M+1` levels evenly tile `[0, N·Δ_imc]`.
pub fn full_range_adc(n_max: usize, delta_imc: f64, b_adc: u32) -> Result<UniformAdc> {
    check_bits(b_adc)?;
    if n_max == 0 {
        return Err(Error::invalid("full-range ADC needs N >= 1"));
    }
    if !(delta_imc > 0.0) {
        return Err(Error::invalid(format!("delta_imc = {delta_imc} must be > 0")));
    }
    let levels = (threshold_count(b_adc) + 1) as f64;
    let delta_adc = n_max as f64 * delta_imc / levels;
    UniformAdc::new(b_adc, 0.5 * delta_adc, delta_adc)
}

/// Symmetric uniform quantizer clipping at `mean ± k·sigma`.
///
/// For one bit there is a single threshold at the mean and `k` places the
/// two levels at `mean ± k·sigma`.
pub fn symmetric_uniform(mean: f64, sigma: f64, k: f64, b_adc: u32) -> Result<UniformAdc> {
    let m = threshold_count(b_adc);
    if m == 1 {
        UniformAdc::new(b_adc, mean, 2.0 * k * sigma)
    } else {
        UniformAdc::new(b_adc, mean - k * sigma, 2.0 * k * sigma / (m - 1) as f64)
    }
}

/// Clipping factor `k` maximizing the SQNR of a standard normal input with a
/// symmetric uniform `b_adc`-bit quantizer.
pub fn occ_clip_factor(b_adc: u32) -> Result<f64> {
    check_bits(b_adc)?;
    let standard = Gaussian { mean: 0.0, sigma: 1.0 };
    let mse = |k: f64| {
        let adc = symmetric_uniform(0.0, 1.0, k, b_adc).expect("k > 0");
        gaussian_mse_q(&Adc::Uniform(adc), standard)
    };
    // coarse scan to bracket the optimum, then golden-section refinement
    const K_MAX: f64 = 8.0;
    const STEPS: usize = 800;
    let h = K_MAX / STEPS as f64;
    let best = (1..=STEPS)
        .map(|i| (i, mse(i as f64 * h)))
        .fold((1, f64::INFINITY), |acc, (i, e)| if e < acc.1 { (i, e) } else { acc });
    let mut lo = (best.0 as f64 - 1.0) * h;
    let mut hi = ((best.0 + 1) as f64 * h).min(K_MAX);
    lo = lo.max(1e-9);
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (mse(c), mse(d));
    while hi - lo > 1e-6 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = mse(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = mse(d);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Optimal-clipping uniform ADC for a Gaussian input: clipping thresholds at
/// `mean ± k·sigma` with `k` chosen to maximize SQNR.
pub fn occ_adc(mean: f64, sigma: f64, b_adc: u32) -> Result<UniformAdc> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma = {sigma} must be > 0")));
    }
    symmetric_uniform(mean, sigma, occ_clip_factor(b_adc)?, b_adc)
}

/// Outcome of a Lloyd-Max run.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydMax {
    pub adc: GeneralAdc,
    pub iterations: usize,
    /// `MSE_q` after each iteration, in the input's squared units.
    pub mse_history: Vec<f64>,
}

pub const LLOYD_MAX_REL_TOL: f64 = 1e-10;
pub const LLOYD_MAX_MAX_ITERS: usize = 10_000;

/// Lloyd-Max quantizer for `N(mean, sigma²)`.
///
/// Runs on the standard normal and maps the result affinely, starting from
/// levels spread uniformly over `±4σ`. Each iteration places thresholds at
/// level midpoints and levels at cell centroids; it stops once the relative
/// change in `MSE_q` drops below [`LLOYD_MAX_REL_TOL`].
pub fn lloyd_max(mean: f64, sigma: f64, b_adc: u32) -> Result<LloydMax> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma = {sigma} must be > 0")));
    }
    check_bits(b_adc)?;
    let m = threshold_count(b_adc);
    let mut levels: Vec<f64> = (0..=m).map(|i| -4.0 + 8.0 * i as f64 / m as f64).collect();
    let mut thresholds: Vec<f64> = Vec::with_capacity(m);
    let mut history = Vec::new();
    let standard = Gaussian { mean: 0.0, sigma: 1.0 };

    let mut iterations = 0;
    while iterations < LLOYD_MAX_MAX_ITERS {
        iterations += 1;
        thresholds.clear();
        thresholds.extend(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        for (k, r) in levels.iter_mut().enumerate() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { thresholds[k - 1] };
            let hi = if k == m { f64::INFINITY } else { thresholds[k] };
            let p = interval_prob(lo, hi, 0.0, 1.0);
            if p > 1e-300 {
                *r = (std_normal_pdf(lo) - std_normal_pdf(hi)) / p;
            }
        }
        let mse: f64 = (0..=m)
            .map(|k| {
                let lo = if k == 0 { f64::NEG_INFINITY } else { thresholds[k - 1] };
                let hi = if k == m { f64::INFINITY } else { thresholds[k] };
                cell_squared_error(levels[k], lo, hi, standard.mean, standard.sigma)
            })
            .sum();
        let done = history
            .last()
            .is_some_and(|&prev: &f64| (prev - mse).abs() <= LLOYD_MAX_REL_TOL * prev);
        history.push(mse);
        if done {
            break;
        }
    }
    let unit = GeneralAdc::new(thresholds, levels)?;
    Ok(LloydMax {
        adc: unit.affine(sigma, mean)?,
        iterations,
        mse_history: history.into_iter().map(|e| e * sigma * sigma).collect(),
    })
}
