//! CSNR-optimal clipping-threshold search and minimum-precision search.

use alloc::format;

use crate::analytic::{dot_product_error, AimcParams};
use crate::error::{Error, Result};
use crate::quantizer::{threshold_count, UniformAdc, MAX_BITS};
use crate::ratio_db;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CactusResult {
    pub adc: UniformAdc,
    pub t1_opt: f64,
    pub t_m_opt: f64,
    pub delta_adc_opt: f64,
    pub mse_dp_min: f64,
    pub mu_off: f64,
    pub csnr_max_db: f64,
    /// Number of candidates scored (1 for the aligned branch).
    pub candidates_evaluated: usize,
    /// Whether the precision sufficed to align every level with the ideal
    /// dot-product lattice, so no search ran.
    pub aligned: bool,
}

/// `2^B >= N`, i.e. `B >= log2 N`.
pub fn precision_covers(n_max: usize, b_adc: u32) -> bool {
    b_adc >= usize::BITS || (1usize << b_adc) >= n_max
}

/// Candidate `(l, k)` pairs: step `k·Δ_imc`, lowest threshold `(l+0.5)·Δ_imc`.
///
/// Steps grow while `(M−0.5)·k < N`; for each step the offset grows while
/// `(M−1)·k + l + 0.5 < N`, so every threshold sits midway between two
/// adjacent ideal levels and `t_M` stays below `N·Δ_imc`.
pub fn candidates(n_max: usize, b_adc: u32) -> impl Iterator<Item = (usize, usize)> {
    let m = threshold_count(b_adc.min(MAX_BITS)) as f64;
    let n = n_max as f64;
    (1..)
        .take_while(move |&k| (m - 0.5) * (k as f64) < n)
        .flat_map(move |k| {
            (0..)
                .take_while(move |&l| (m - 1.0) * k as f64 + l as f64 + 0.5 < n)
                .map(move |l| (l, k))
        })
}

/// Searches the lowest-MSE uniform ADC among the aligned candidates.
///
/// When `B >= log2 N` the levels are placed directly on the ideal lattice
/// `0, Δ, ..., MΔ`. Note that for `2^B = N` this lattice stops at `(N−1)Δ`
/// and `y = N` is clipped by one level. Otherwise every candidate is
/// scored and the first strict minimum of `MSE_dp` wins.
pub fn cactus(params: &AimcParams, b_adc: u32) -> Result<CactusResult> {
    if b_adc < 1 || b_adc > MAX_BITS {
        return Err(Error::invalid(format!("b_adc = {b_adc} outside 1..={MAX_BITS}")));
    }
    let d = params.delta_imc();
    let var = params.pmf().variance();
    let finish = |adc: UniformAdc, mu: f64, mse: f64, count: usize, aligned: bool| CactusResult {
        adc,
        t1_opt: adc.t1(),
        t_m_opt: adc.t_m(),
        delta_adc_opt: adc.delta_adc(),
        mse_dp_min: mse.max(0.0),
        mu_off: mu,
        csnr_max_db: ratio_db(var, mse.max(0.0)),
        candidates_evaluated: count,
        aligned,
    };

    if precision_covers(params.n_max(), b_adc) {
        let adc = UniformAdc::new(b_adc, 0.5 * d, d)?;
        let (mu, mse) = dot_product_error(params, &adc);
        return Ok(finish(adc, mu, mse, 1, true));
    }

    let mut best: Option<(UniformAdc, f64, f64)> = None;
    let mut count = 0;
    for (l, k) in candidates(params.n_max(), b_adc) {
        let adc = UniformAdc::new(b_adc, (l as f64 + 0.5) * d, k as f64 * d)?;
        let (mu, mse) = dot_product_error(params, &adc);
        count += 1;
        if best.as_ref().map_or(true, |b| mse < b.2) {
            best = Some((adc, mu, mse));
        }
    }
    // N >= 2^B >= 2 here, so (l, k) = (0, 1) is always a candidate
    let (adc, mu, mse) = best.expect("candidate set is never empty");
    Ok(finish(adc, mu, mse, count, false))
}

/// Outcome of a minimum-precision search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinPrecision {
    Bits(u32),
    /// No precision up to the search limit met the target.
    Unattainable,
}

impl MinPrecision {
    /// Bits, with `Unattainable` ordered above every precision.
    pub fn as_rank(&self) -> u64 {
        match self {
            MinPrecision::Bits(b) => *b as u64,
            MinPrecision::Unattainable => u64::MAX,
        }
    }
}

/// `⌈log2 N⌉`, at least 1.
pub fn max_search_bits(n_max: usize) -> u32 {
    let bits = if n_max <= 1 { 0 } else { usize::BITS - (n_max - 1).leading_zeros() };
    bits.clamp(1, MAX_BITS)
}

/// Smallest `B` in `1..=max_bits` whose CSNR (as reported by `csnr_at`)
/// reaches `csnr_spec_db`.
pub fn min_precision_with<F>(max_bits: u32, csnr_spec_db: f64, mut csnr_at: F) -> Result<MinPrecision>
where
    F: FnMut(u32) -> Result<f64>,
{
    for b in 1..=max_bits {
        if csnr_at(b)? >= csnr_spec_db {
            return Ok(MinPrecision::Bits(b));
        }
    }
    Ok(MinPrecision::Unattainable)
}

/// Smallest ADC precision whose CSNR-optimal thresholds meet `csnr_spec_db`,
/// searching `B = 1..=⌈log2 N⌉`.
pub fn min_adc_precision(params: &AimcParams, csnr_spec_db: f64) -> Result<MinPrecision> {
    min_precision_with(max_search_bits(params.n_max()), csnr_spec_db, |b| {
        Ok(cactus(params, b)?.csnr_max_db)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::accuracy_report;
    use crate::dist::DotProductPmf;
    use alloc::vec::Vec;

    fn params(n: usize, delta: f64, sigma: f64) -> AimcParams {
        AimcParams::new(DotProductPmf::binomial(n, 0.25).unwrap(), delta, sigma).unwrap()
    }

    #[test]
    fn candidate_count_for_sixteen_levels() {
        let c: Vec<_> = candidates(16, 3).collect();
        assert_eq!(c.len(), 14);
        assert_eq!(c.iter().filter(|p| p.1 == 1).count(), 10);
        assert_eq!(c.iter().filter(|p| p.1 == 2).count(), 4);
        assert_eq!(c.last(), Some(&(3, 2)));
    }

    #[test]
    fn aligned_branch() {
        let p = params(16, 0.0394, 0.005);
        let r = cactus(&p, 4).unwrap();
        assert!(r.aligned);
        assert_eq!(r.t1_opt, 0.5 * 0.0394);
        assert!((r.t_m_opt - 14.5 * 0.0394).abs() < 1e-15);
        assert_eq!(r.delta_adc_opt, 0.0394);
    }

    #[test]
    fn search_result_is_the_minimum_over_candidates() {
        let p = params(16, 0.0394, 0.005);
        let r = cactus(&p, 3).unwrap();
        assert!(!r.aligned);
        assert_eq!(r.candidates_evaluated, 14);
        let best = candidates(16, 3)
            .map(|(l, k)| {
                let adc = UniformAdc::new(3, (l as f64 + 0.5) * 0.0394, k as f64 * 0.0394).unwrap();
                dot_product_error(&p, &adc).1
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.mse_dp_min, best);
        assert_eq!(accuracy_report(&p, &r.adc).mse_dp, r.mse_dp_min);
        let k = r.delta_adc_opt / 0.0394;
        assert!((k - k.round()).abs() < 1e-12);
    }

    #[test]
    fn candidates_respect_loop_guards() {
        for n in [5usize, 16, 40, 128] {
            for b in 1..=6 {
                if precision_covers(n, b) {
                    continue;
                }
                let m = threshold_count(b);
                for (l, k) in candidates(n, b) {
                    let t_m = (m - 1) as f64 * k as f64 + l as f64 + 0.5;
                    assert!(t_m < n as f64, "n={n} b={b} l={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn zero_bits_rejected() {
        assert!(cactus(&params(16, 1.0, 0.1), 0).is_err());
    }

    #[test]
    fn min_precision_examples() {
        let p = params(64, 0.01, 0.001);
        assert_eq!(min_adc_precision(&p, -10.0).unwrap(), MinPrecision::Bits(1));
        assert_eq!(min_adc_precision(&p, 200.0).unwrap(), MinPrecision::Unattainable);
        let mut last = 0;
        for spec in [0.0, 5.0, 10.0, 20.0, 30.0, 40.0, 60.0, 90.0] {
            let r = min_adc_precision(&p, spec).unwrap().as_rank();
            assert!(r >= last);
            last = r;
        }
    }

    #[test]
    fn search_limit() {
        assert_eq!(max_search_bits(1), 1);
        assert_eq!(max_search_bits(16), 4);
        assert_eq!(max_search_bits(17), 5);
        assert_eq!(max_search_bits(256), 8);
    }
}
