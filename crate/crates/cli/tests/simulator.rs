use aimc_adc_cli::simulator::{column_params, sample_dot_product, Column};
use aimc_adc_cli::{delta_imc, simulate_csnr, CircuitParams};
use aimc_adc_core::analytic::{aligned_adc, evaluate};
use aimc_adc_core::dist::std_normal_cdf;
use aimc_adc_core::scheme::design_adc;
use aimc_adc_core::{Adc, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit(sigma_adc: f64) -> CircuitParams {
    CircuitParams::default().with_sigma_adc(sigma_adc)
}

#[test]
fn delta_imc_examples() {
    assert_eq!(delta_imc(&CircuitParams::default(), 128).unwrap(), 7.03125e-3);
    let parasitic = CircuitParams { c_par: 6.84e-15, ..Default::default() };
    assert!((delta_imc(&parasitic, 16).unwrap() - 39.4e-3).abs() < 0.05e-3);
    let huge = CircuitParams { c_par: 1e-6, ..Default::default() };
    assert!(delta_imc(&huge, 16).unwrap() < 1e-9);
    assert!(delta_imc(&CircuitParams::default(), 0).is_err());
    assert!(delta_imc(&CircuitParams { c_cell: 0.0, ..Default::default() }, 4).is_err());
}

#[test]
fn single_cell_product_is_one_in_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 100_000;
    let ones = (0..draws).filter(|_| sample_dot_product(1, &mut rng).y_ideal == 1).count();
    let sd = (0.25f64 * 0.75 / draws as f64).sqrt();
    assert!((ones as f64 / draws as f64 - 0.25).abs() <= 3.0 * sd);
}

#[test]
fn dot_product_mean_at_128() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 100_000;
    let mut total = 0usize;
    for _ in 0..draws {
        let s = sample_dot_product(128, &mut rng);
        assert_eq!(s.w.len(), 128);
        assert_eq!(s.y_ideal, s.w.iter().zip(&s.x).filter(|(a, b)| **a && **b).count());
        total += s.y_ideal;
    }
    let mean = total as f64 / draws as f64;
    assert!((mean - 32.0).abs() <= 3.0 * (24.0f64 / draws as f64).sqrt(), "{mean}");
}

#[test]
fn operand_draws_are_reproducible() {
    let a: Vec<_> = {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        (0..50).map(|_| sample_dot_product(100, &mut rng)).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for s in a {
        assert_eq!(s, sample_dot_product(100, &mut rng));
    }
}

#[test]
fn noiseless_aligned_column_is_exact() {
    let c = circuit(0.0);
    let p = column_params(&c, 128).unwrap();
    let adc = Adc::Uniform(aligned_adc(&p, 8).unwrap());
    let r = simulate_csnr(&c, 128, &adc, 20_000, 3).unwrap();
    assert_eq!(r.csnr_db_empirical, f64::INFINITY);
    assert!(r.mean_error.abs() < 1e-12);
    assert_eq!(r.n_samples, 20_000);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let c = circuit(0.75e-3);
    let p = column_params(&c, 256).unwrap();
    let adc = design_adc(&p, Scheme::LloydMax, 5).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| simulate_csnr(&c, 256, &adc, 30_001, 42).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
    assert_ne!(one, simulate_csnr(&c, 256, &adc, 30_001, 43).unwrap());
}

#[test]
fn zero_samples_rejected() {
    let c = circuit(1e-3);
    let p = column_params(&c, 16).unwrap();
    let adc = Adc::Uniform(aligned_adc(&p, 4).unwrap());
    assert!(simulate_csnr(&c, 16, &adc, 0, 0).is_err());
}

#[test]
fn pre_adc_voltage_follows_the_gaussian_mixture() {
    // Δ_imc comparable to σ, where the mixture is far from a lattice
    let c = circuit(3e-3);
    let n = 64;
    let p = column_params(&c, n).unwrap();
    let adc = Adc::Uniform(aligned_adc(&p, 6).unwrap());
    let column = Column::new(&c, n, adc, 5).unwrap();
    let mut v = column.pre_adc_samples(100_000, 5);
    v.sort_by(f64::total_cmp);
    let cdf = |x: f64| -> f64 {
        p.pmf()
            .iter()
            .map(|(y, q)| q * std_normal_cdf((x - y as f64 * p.delta_imc()) / p.sigma_a()))
            .sum()
    };
    let n_s = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n_s).abs().max((i as f64 + 1.0) / n_s - f)
        })
        .fold(0.0, f64::max);
    // Kolmogorov critical value at the 1% level
    assert!(d * n_s.sqrt() < 1.628, "KS statistic {}", d * n_s.sqrt());
}

#[test]
fn estimate_variance_halves_with_twice_the_samples() {
    let c = CircuitParams { c_par: 6.84e-15, ..circuit(5e-3) };
    let p = column_params(&c, 16).unwrap();
    let adc = design_adc(&p, Scheme::Cactus, 3).unwrap();
    let spread = |samples: u64| {
        let est: Vec<f64> = (0..30u64)
            .map(|s| simulate_csnr(&c, 16, &adc, samples, 1000 + s).unwrap().csnr_db_empirical)
            .collect();
        let m = est.iter().sum::<f64>() / est.len() as f64;
        est.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (est.len() - 1) as f64
    };
    let ratio = spread(4_000) / spread(8_000);
    // 2·F(29, 29) central 99% interval
    assert!((0.75..=5.3).contains(&ratio), "variance ratio {ratio}");
}

#[test]
fn offset_calibration_holds_empirically() {
    for (n, sigma, b) in [(16, 5e-3, 3), (128, 1e-3, 5), (256, 0.5e-3, 4)] {
        let c = circuit(sigma);
        let p = column_params(&c, n).unwrap();
        for scheme in Scheme::COMPARED {
            let adc = design_adc(&p, scheme, b).unwrap();
            let mse = evaluate(&p, &adc).mse_dp;
            let samples = 200_000;
            let r = simulate_csnr(&c, n, &adc, samples, 8).unwrap();
            let bound = 3.0 * (mse / samples as f64).sqrt();
            assert!(r.mean_error.abs() <= bound, "N={n} {scheme}: {} > {bound}", r.mean_error);
        }
    }
}

#[test]
fn capacitor_mismatch_costs_accuracy() {
    let n = 128;
    let ideal = circuit(0.5e-3);
    let p = column_params(&ideal, n).unwrap();
    let adc = design_adc(&p, Scheme::Cactus, 6).unwrap();
    let mismatched = CircuitParams { sigma_cap_rel: 0.05, ..ideal };
    let a = simulate_csnr(&mismatched, n, &adc, 50_000, 4).unwrap();
    assert_eq!(a, simulate_csnr(&mismatched, n, &adc, 50_000, 4).unwrap());
    let theory = evaluate(&p, &adc).csnr_db;
    assert!(a.csnr_db_empirical < theory - 3.0, "{} vs {theory}", a.csnr_db_empirical);
}

