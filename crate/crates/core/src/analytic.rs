//! Closed-form accuracy of an AIMC column followed by an ADC.
//!
//! The column produces `V = y·Δ_imc + η` with `y ~ p(y)` on `{0..N}` and
//! `η ~ N(0, σ_a²)`. The digital output is `y_imc = Q(V)/Δ_imc − μ_off`, where
//! the offset `μ_off` makes the computational error zero mean. Uniform ADCs
//! are evaluated through the threshold-sum form (a sum of Gaussian CDFs over
//! the thresholds per dot-product value); arbitrary quantizers go through
//! the per-level output PMF.

use alloc::format;
use alloc::vec::Vec;

use crate::dist::{below_prob, interval_prob, DotProductPmf};
use crate::error::{Error, Result};
use crate::quantizer::{cell_squared_error, gaussian_mse_q, Adc, Gaussian, GeneralAdc, UniformAdc};
use crate::ratio_db;

/// Analog side of a column: ideal dot-product PMF, level spacing and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct AimcParams {
    pmf: DotProductPmf,
    delta_imc: f64,
    sigma_a: f64,
}

impl AimcParams {
    pub fn new(pmf: DotProductPmf, delta_imc: f64, sigma_a: f64) -> Result<Self> {
        if !(delta_imc > 0.0 && delta_imc.is_finite()) {
            return Err(Error::invalid(format!("delta_imc = {delta_imc} must be > 0")));
        }
        if !(sigma_a >= 0.0 && sigma_a.is_finite()) {
            return Err(Error::invalid(format!("sigma_a = {sigma_a} must be >= 0")));
        }
        Ok(AimcParams { pmf, delta_imc, sigma_a })
    }

    pub fn pmf(&self) -> &DotProductPmf {
        &self.pmf
    }

    pub fn n_max(&self) -> usize {
        self.pmf.n_max()
    }

    pub fn delta_imc(&self) -> f64 {
        self.delta_imc
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a
    }

    pub fn with_sigma_a(&self, sigma_a: f64) -> Result<Self> {
        Self::new(self.pmf.clone(), self.delta_imc, sigma_a)
    }

    /// Mean and standard deviation of the pre-ADC voltage, used when the
    /// mixture is approximated by a single Gaussian.
    pub fn gaussian_approximation(&self) -> Gaussian {
        let (mean, var) = self.pmf.moments();
        let d = self.delta_imc;
        Gaussian {
            mean: mean * d,
            sigma: libm::sqrt(var * d * d + self.sigma_a * self.sigma_a),
        }
    }
}

/// Accuracy of one (column, ADC) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    /// Digital offset subtracted from `Q(V)/Δ_imc`.
    pub mu_off: f64,
    /// Mean squared dot-product error after offset removal.
    pub mse_dp: f64,
    /// `10·log10(Var(y) / MSE_dp)`, `+∞` for error-free configurations.
    pub csnr_db: f64,
    /// SQNR of the ADC on the pre-ADC mixture, when computed.
    pub sqnr_db: Option<f64>,
}

impl AccuracyReport {
    fn from_error(params: &AimcParams, mu_off: f64, mse_dp: f64) -> Self {
        let mse_dp = mse_dp.max(0.0);
        AccuracyReport {
            mu_off,
            mse_dp,
            csnr_db: ratio_db(params.pmf.variance(), mse_dp),
            sqnr_db: None,
        }
    }
}

// Φ underflows to zero (well below any summand that matters) past this many σ.
const TAIL_CUTOFF: f64 = 38.5;

/// Conditional mean error and variance of `Q(yΔ + η)` for a uniform ADC, in
/// volts and volts².
///
/// With `j` the cell containing `v = yΔ`, the output is `r_j` plus one step
/// per threshold crossed: `Q = r_j + Δ_adc·(Σ_{k>j} 1{V≥t_k} − Σ_{k≤j} 1{V<t_k})`.
/// Expanding around `r_j` keeps every term a small tail probability, which
/// is the same quantity as the Gaussian-CDF threshold sums but without the
/// cancellation of `(r_M − v)²` against the full sum.
fn uniform_conditional(adc: &UniformAdc, v: f64, sigma: f64) -> (f64, f64) {
    let m = adc.m();
    let d = adc.delta_adc();
    let j = adc.index(v);
    let (mut up, mut up2) = (0.0, 0.0);
    for k in j + 1..=m {
        // P(V >= t_k), zero from here on once it underflows
        let p = below_prob(v, adc.threshold(k), sigma);
        if p == 0.0 {
            break;
        }
        up += p;
        up2 += (2 * (k - j) - 1) as f64 * p;
    }
    let (mut down, mut down2) = (0.0, 0.0);
    for k in (1..=j).rev() {
        let p = below_prob(adc.threshold(k), v, sigma);
        if p == 0.0 {
            break;
        }
        down += p;
        down2 += (2 * (j - k) + 1) as f64 * p;
    }
    let shift = d * (up - down);
    let mean_err = adc.level(j) - v + shift;
    let var = (d * d * (up2 + down2) - shift * shift).max(0.0);
    (mean_err, var)
}

/// `(μ_off, MSE_dp)` for a uniform ADC.
///
/// `MSE_dp = α − μ_off²` is split by the law of total variance into the mean
/// conditional variance plus the spread of the conditional means around
/// `μ_off`, which stays accurate when the error is tiny.
pub fn dot_product_error(params: &AimcParams, adc: &UniformAdc) -> (f64, f64) {
    let d = params.delta_imc;
    let sigma = params.sigma_a;
    let mut cond: Vec<(f64, f64, f64)> = Vec::with_capacity(params.n_max() + 1);
    let mut mu = 0.0;
    for (y, p) in params.pmf.iter() {
        if p == 0.0 {
            continue;
        }
        let (mean_err, var) = uniform_conditional(adc, y as f64 * d, sigma);
        let (m, v) = (mean_err / d, var / (d * d));
        mu += p * m;
        cond.push((p, m, v));
    }
    let mse = cond
        .iter()
        .map(|&(p, m, v)| p * (v + (m - mu) * (m - mu)))
        .sum();
    (mu, mse)
}

/// Offset `μ_off` of a uniform ADC.
pub fn mu_off(params: &AimcParams, adc: &UniformAdc) -> f64 {
    dot_product_error(params, adc).0
}

/// `α = E[(Q(V)/Δ_imc − y)²]`, the raw second moment of the error before the
/// offset is removed, so that `MSE_dp = α − μ_off²`.
pub fn alpha(params: &AimcParams, adc: &UniformAdc) -> f64 {
    let d = params.delta_imc;
    params
        .pmf
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(y, p)| {
            let (m, v) = uniform_conditional(adc, y as f64 * d, params.sigma_a);
            p * (v + m * m) / (d * d)
        })
        .sum()
}

/// Full report for a uniform ADC, including the mixture SQNR.
pub fn accuracy_report(params: &AimcParams, adc: &UniformAdc) -> AccuracyReport {
    let (mu, mse) = dot_product_error(params, adc);
    AccuracyReport {
        sqnr_db: Some(mixture_sqnr_db(params, &Adc::Uniform(*adc))),
        ..AccuracyReport::from_error(params, mu, mse)
    }
}

/// Distribution of the ADC output over its levels `r_0..r_M` given `y`.
pub fn quantizer_output_pmf(y: usize, params: &AimcParams, adc: &Adc) -> Vec<f64> {
    let v = y as f64 * params.delta_imc;
    (0..=adc.m())
        .map(|k| {
            let (lo, hi) = adc.cell(k);
            interval_prob(lo, hi, v, params.sigma_a)
        })
        .collect()
}

/// Report for an arbitrary quantizer, computed from the output PMF:
/// `μ_off = Σ_y p(y) Σ_k P(r_k|y)(r_k/Δ − y)` and
/// `MSE_dp = Σ_y p(y) Σ_k P(r_k|y)(r_k/Δ − μ_off − y)²`.
pub fn accuracy_report_general(params: &AimcParams, adc: &Adc) -> AccuracyReport {
    let (mu, mse) = general_dot_product_error(params, adc);
    AccuracyReport {
        sqnr_db: Some(mixture_sqnr_db(params, adc)),
        ..AccuracyReport::from_error(params, mu, mse)
    }
}

/// `(μ_off, MSE_dp)` from the output PMF.
pub fn general_dot_product_error(params: &AimcParams, adc: &Adc) -> (f64, f64) {
    let d = params.delta_imc;
    let rows: Vec<(usize, f64, Vec<f64>)> = params
        .pmf
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(y, p)| (y, p, quantizer_output_pmf(y, params, adc)))
        .collect();
    let mu: f64 = rows
        .iter()
        .map(|(y, p, q)| {
            p * q
                .iter()
                .enumerate()
                .map(|(k, qk)| qk * (adc.level(k) / d - *y as f64))
                .sum::<f64>()
        })
        .sum();
    let mse = rows
        .iter()
        .map(|(y, p, q)| {
            p * q
                .iter()
                .enumerate()
                .map(|(k, qk)| {
                    let e = adc.level(k) / d - mu - *y as f64;
                    qk * e * e
                })
                .sum::<f64>()
        })
        .sum();
    (mu, mse)
}

/// Dispatches on the ADC kind.
pub fn evaluate(params: &AimcParams, adc: &Adc) -> AccuracyReport {
    match adc {
        Adc::Uniform(u) => accuracy_report(params, u),
        Adc::General(_) => accuracy_report_general(params, adc),
    }
}

/// `E[(Q(V) − V)²]` of the ADC on the pre-ADC Gaussian mixture.
pub fn mixture_mse_q(params: &AimcParams, adc: &Adc) -> f64 {
    let d = params.delta_imc;
    let s = params.sigma_a;
    params
        .pmf
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(y, p)| {
            let v = y as f64 * d;
            let e = if s == 0.0 {
                let q = adc.quantize(v) - v;
                q * q
            } else {
                // only cells within reach of the noise contribute
                let lo_k = adc.index(v - TAIL_CUTOFF * s);
                let hi_k = adc.index(v + TAIL_CUTOFF * s);
                (lo_k..=hi_k)
                    .map(|k| {
                        let (lo, hi) = adc.cell(k);
                        cell_squared_error(adc.level(k), lo, hi, v, s)
                    })
                    .sum()
            };
            p * e
        })
        .sum()
}

/// SQNR of the ADC on the pre-ADC mixture: `Var(V) / E[(Q(V) − V)²]`.
pub fn mixture_sqnr_db(params: &AimcParams, adc: &Adc) -> f64 {
    let d = params.delta_imc;
    let var = params.pmf.variance() * d * d + params.sigma_a * params.sigma_a;
    ratio_db(var, mixture_mse_q(params, adc))
}

/// SQNR of the ADC when the mixture is replaced by its Gaussian approximation.
pub fn gaussian_approx_sqnr_db(params: &AimcParams, adc: &Adc) -> f64 {
    let g = params.gaussian_approximation();
    ratio_db(g.sigma * g.sigma, gaussian_mse_q(adc, g))
}

/// Uniform ADC whose levels sit exactly on `0, Δ, ..., M·Δ`.
pub fn aligned_adc(params: &AimcParams, b_adc: u32) -> Result<UniformAdc> {
    let d = params.delta_imc;
    UniformAdc::new(b_adc, 0.5 * d, d)
}

/// The general ADC with levels `{0, Δ, ..., NΔ}` and thresholds at the
/// midpoints.
pub fn lattice_adc(params: &AimcParams) -> Result<GeneralAdc> {
    let d = params.delta_imc;
    let n = params.n_max();
    if n == 0 {
        return Err(Error::invalid("lattice ADC needs N >= 1"));
    }
    GeneralAdc::new(
        (1..=n).map(|k| (k as f64 - 0.5) * d).collect(),
        (0..=n).map(|k| k as f64 * d).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    fn small_case() -> (AimcParams, UniformAdc) {
        let pmf = DotProductPmf::binomial(4, 0.25).unwrap();
        let params = AimcParams::new(pmf, 0.010, 0.002).unwrap();
        (params, UniformAdc::new(2, 0.005, 0.010).unwrap())
    }

    #[test]
    fn small_case_matches_quadrature() {
        // values from adaptive quadrature of E[Q(yΔ+η)] at 40 digits
        let (params, adc) = small_case();
        let (mu, mse) = dot_product_error(&params, &adc);
        assert!(rel(mu, -0.002_232_551_142_646_694_5) < 1e-9, "mu = {mu}");
        assert!(rel(mse, 0.014_016_228_375_056_226) < 1e-9, "mse = {mse}");
    }

    #[test]
    fn aligned_noiseless_has_zero_offset() {
        let pmf = DotProductPmf::binomial(16, 0.25).unwrap();
        let params = AimcParams::new(pmf, 1.0, 0.0).unwrap();
        let adc = aligned_adc(&params, 5).unwrap();
        let r = accuracy_report(&params, &adc);
        assert_eq!(r.mu_off, 0.0);
        assert_eq!(r.mse_dp, 0.0);
        assert_eq!(r.csnr_db, f64::INFINITY);
    }

    #[test]
    fn point_mass_at_zero_outputs_r0() {
        let pmf = DotProductPmf::point_mass(8, 0).unwrap();
        let params = AimcParams::new(pmf, 0.5, 1e-9).unwrap();
        let adc = UniformAdc::new(3, 0.3, 0.2).unwrap();
        let mu = mu_off(&params, &adc);
        assert!(rel(mu, adc.level(0) / 0.5) < 1e-12);
    }

    #[test]
    fn output_pmf_properties() {
        let (params, adc) = small_case();
        let adc = Adc::Uniform(adc);
        for y in 0..=4 {
            let q = quantizer_output_pmf(y, &params, &adc);
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // noiseless input strictly inside a cell
        let quiet = params.with_sigma_a(0.0).unwrap();
        assert_eq!(quantizer_output_pmf(2, &quiet, &adc), vec![0.0, 0.0, 1.0, 0.0]);
        // input sitting on the single threshold of a 1-bit ADC
        let one_bit = Adc::Uniform(UniformAdc::new(1, 0.02, 0.01).unwrap());
        assert_eq!(quantizer_output_pmf(2, &params, &one_bit), vec![0.5, 0.5]);
    }

    #[test]
    fn uniform_and_general_routes_agree() {
        let (params, adc) = small_case();
        let a = accuracy_report(&params, &adc);
        let b = accuracy_report_general(&params, &Adc::General(adc.to_general()));
        assert!(rel(a.mu_off, b.mu_off) < 1e-9);
        assert!(rel(a.mse_dp, b.mse_dp) < 1e-9);
        assert!(rel(a.sqnr_db.unwrap(), b.sqnr_db.unwrap()) < 1e-12);
    }

    #[test]
    fn lattice_general_adc_matches_aligned_uniform() {
        // N = 2^B - 1 so the uniform ADC has exactly the lattice levels
        let pmf = DotProductPmf::binomial(15, 0.25).unwrap();
        let params = AimcParams::new(pmf, 0.04, 0.004).unwrap();
        let lattice = accuracy_report_general(&params, &Adc::General(lattice_adc(&params).unwrap()));
        let aligned = accuracy_report(&params, &aligned_adc(&params, 4).unwrap());
        assert!(rel(lattice.mse_dp, aligned.mse_dp) < 1e-12, "{lattice:?} {aligned:?}");
        assert!(rel(lattice.csnr_db, aligned.csnr_db) < 1e-12);
    }

    #[test]
    fn mse_equals_alpha_minus_mu_squared() {
        let (params, adc) = small_case();
        let (mu, mse) = dot_product_error(&params, &adc);
        assert!(rel(alpha(&params, &adc) - mu * mu, mse) < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let pmf = DotProductPmf::binomial(4, 0.25).unwrap();
        assert!(AimcParams::new(pmf.clone(), 0.0, 0.1).is_err());
        assert!(AimcParams::new(pmf, 1.0, -0.1).is_err());
    }
}
