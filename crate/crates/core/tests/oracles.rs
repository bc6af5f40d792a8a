use aimc_adc_core::analytic::{accuracy_report, dot_product_error, quantizer_output_pmf};
use aimc_adc_core::quantizer::{gaussian_sqnr_db, symmetric_uniform, Gaussian};
use aimc_adc_core::{Adc, AimcParams, DotProductPmf, UniformAdc};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

// P(lo <= N(c, s²) < hi), evaluated on the side of the mean that keeps the
// difference a small number.
fn cell_prob(lo: f64, hi: f64, c: f64, s: f64) -> f64 {
    if s == 0.0 {
        let inside = |t: f64| if c > t { 1.0 } else if c == t { 0.5 } else { 0.0 };
        return inside(lo) - inside(hi);
    }
    let (a, b) = ((lo - c) / s, (hi - c) / s);
    if a > 0.0 {
        phi(-a) - phi(-b)
    } else {
        phi(b) - phi(a)
    }
}

// Brute-force double sum over y and output levels.
fn brute_force(params: &AimcParams, adc: &UniformAdc) -> (f64, f64) {
    let d = params.delta_imc();
    let s = params.sigma_a();
    let m = adc.m();
    let table: Vec<(f64, f64, Vec<f64>)> = params
        .pmf()
        .iter()
        .map(|(y, p)| {
            let v = y as f64 * d;
            let probs = (0..=m)
                .map(|k| {
                    let lo = if k == 0 { f64::NEG_INFINITY } else { adc.threshold(k) };
                    let hi = if k == m { f64::INFINITY } else { adc.threshold(k + 1) };
                    cell_prob(lo, hi, v, s)
                })
                .collect();
            (y as f64, p, probs)
        })
        .collect();
    let mu: f64 = table
        .iter()
        .map(|(y, p, q)| p * q.iter().enumerate().map(|(k, qk)| qk * (adc.level(k) / d - y)).sum::<f64>())
        .sum();
    let mse = table
        .iter()
        .map(|(y, p, q)| {
            p * q
                .iter()
                .enumerate()
                .map(|(k, qk)| {
                    let e = adc.level(k) / d - mu - y;
                    qk * e * e
                })
                .sum::<f64>()
        })
        .sum();
    (mu, mse)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-15
}

fn exact_binomial(n: u64, p: f64) -> Vec<f64> {
    let p = BigRational::from_float(p).unwrap();
    let q = BigRational::one() - &p;
    let mut out = Vec::new();
    let mut choose = BigInt::one();
    for y in 0..=n {
        if y > 0 {
            choose = choose * BigInt::from(n - y + 1) / BigInt::from(y);
        }
        let term = BigRational::from_integer(choose.clone())
            * num_traits::pow(p.clone(), y as usize)
            * num_traits::pow(q.clone(), (n - y) as usize);
        out.push(term.to_f64().unwrap());
    }
    out
}

#[test]
fn binomial_matches_exact_rationals() {
    for n in 0..=30u64 {
        for p in [0.0, 0.03, 0.25, 0.5, 0.61, 0.9, 1.0] {
            let got = DotProductPmf::binomial(n as usize, p).unwrap();
            let want = exact_binomial(n, p);
            for (y, (g, w)) in got.probs().iter().zip(&want).enumerate() {
                assert!((g - w).abs() <= 1e-14, "n={n} p={p} y={y}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn reference_configuration_against_quadrature() {
    // N=4, Bi(4, 0.25), Δ=10 mV, σ=2 mV, 2 b, t1=5 mV, Δ_adc=10 mV
    let params = AimcParams::new(DotProductPmf::binomial(4, 0.25).unwrap(), 0.010, 0.002).unwrap();
    let adc = UniformAdc::new(2, 0.005, 0.010).unwrap();
    let (mu, mse) = dot_product_error(&params, &adc);
    assert!(close(mu, -0.0022325511426466945, 1e-9), "{mu}");
    assert!(close(mse, 0.014016228375056226, 1e-9), "{mse}");
    let (bmu, bmse) = brute_force(&params, &adc);
    assert!(close(mu, bmu, 1e-9) && close(mse, bmse, 1e-9));
}

fn random_case() -> impl Strategy<Value = (AimcParams, UniformAdc)> {
    (4usize..=64, 1u32..=6, 0.0f64..=1.0, 0.05f64..0.95, -1.0f64..1.0, 0.1f64..1.5).prop_map(
        |(n, b, noise, p, t1_frac, span)| {
            let delta = 0.01;
            let params = AimcParams::new(DotProductPmf::binomial(n, p).unwrap(), delta, noise * delta).unwrap();
            let m = (1usize << b) - 1;
            let t1 = t1_frac * 0.25 * n as f64 * delta;
            let delta_adc = span * n as f64 * delta / m as f64;
            (params, UniformAdc::new(b, t1, delta_adc).unwrap())
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_brute_force((params, adc) in random_case()) {
        let (mu, mse) = dot_product_error(&params, &adc);
        let (bmu, bmse) = brute_force(&params, &adc);
        // μ_off can cancel to nearly zero, so it also gets an absolute floor
        prop_assert!((mu - bmu).abs() <= 1e-9 * mu.abs().max(bmu.abs()) + 1e-12, "mu {} vs {}", mu, bmu);
        prop_assert!(close(mse, bmse, 1e-9), "mse {} vs {}", mse, bmse);
    }

    #[test]
    fn offset_removes_the_mean_error((params, adc) in random_case()) {
        let mu = accuracy_report(&params, &adc).mu_off;
        let d = params.delta_imc();
        let general = Adc::Uniform(adc);
        let residual: f64 = params
            .pmf()
            .iter()
            .map(|(y, p)| {
                let q = quantizer_output_pmf(y, &params, &general);
                p * q.iter().enumerate().map(|(k, qk)| qk * (general.level(k) / d - mu - y as f64)).sum::<f64>()
            })
            .sum();
        prop_assert!(residual.abs() <= 1e-12, "{}", residual);
    }
}

#[test]
fn gaussian_sqnr_matches_monte_carlo() {
    let input = Gaussian::new(0.3, 1.7).unwrap();
    let adc = Adc::Uniform(symmetric_uniform(input.mean, input.sigma, 4.0, 8).unwrap());
    let theory = gaussian_sqnr_db(&adc, input);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000_000;
    let mut err2 = 0.0;
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let v = input.mean + input.sigma * z;
        let e = adc.quantize(v) - v;
        err2 += e * e;
    }
    let empirical = 10.0 * (input.sigma * input.sigma / (err2 / n as f64)).log10();
    assert!((theory - empirical).abs() < 0.5, "theory {theory} vs mc {empirical}");
}
