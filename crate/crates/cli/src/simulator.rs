//! Behavioral Monte Carlo model of one SRAM AIMC column.
//!
//! Weights and inputs are independent fair bits, so `y = Σ w_i x_i` follows
//! `Bi(N, 0.25)`. The bitline settles by charge sharing to
//! `V = v_dd · Σ c_i w_i x_i / (Σ c_i + c_par)`, the ADC sees `V + η` with
//! thermal noise `η ~ N(0, σ_adc²)`, and the digital side reports
//! `Q(V + η)/Δ_imc − μ_off`.

use aimc_adc_core::analytic::evaluate;
use aimc_adc_core::{ratio_db, Adc, AimcParams, DotProductPmf, Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

/// Number of independent RNG streams a run is split into. Fixed so that
/// results do not depend on the thread count.
pub const PARTITIONS: u64 = 64;

// stream reserved for the per-column mismatch draw
const MISMATCH_STREAM: u64 = u64::MAX;

/// Circuit constants of the column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Supply voltage (V).
    pub v_dd: f64,
    /// Bit-cell capacitance (F).
    pub c_cell: f64,
    /// Column parasitic capacitance (F).
    pub c_par: f64,
    /// Relative standard deviation of the bit-cell capacitance.
    pub sigma_cap_rel: f64,
    /// ADC thermal-noise standard deviation (V).
    pub sigma_adc: f64,
}

impl Default for CircuitParams {
    /// 0.9 V supply, 1 fF cells, no parasitics, mismatch or noise.
    fn default() -> Self {
        CircuitParams { v_dd: 0.9, c_cell: 1e-15, c_par: 0.0, sigma_cap_rel: 0.0, sigma_adc: 0.0 }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("v_dd", self.v_dd, self.v_dd > 0.0),
            ("c_cell", self.c_cell, self.c_cell > 0.0),
            ("c_par", self.c_par, self.c_par >= 0.0),
            ("sigma_cap_rel", self.sigma_cap_rel, self.sigma_cap_rel >= 0.0),
            ("sigma_adc", self.sigma_adc, self.sigma_adc >= 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {value} is out of range")));
            }
        }
        Ok(())
    }

    pub fn with_sigma_adc(mut self, sigma_adc: f64) -> Self {
        self.sigma_adc = sigma_adc;
        self
    }
}

/// Bitline voltage step per unit of dot product:
/// `Δ_imc = v_dd·c_cell / (n·c_cell + c_par)`.
pub fn delta_imc(circuit: &CircuitParams, n: usize) -> Result<f64> {
    circuit.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    Ok(circuit.v_dd / (n as f64 + circuit.c_par / circuit.c_cell))
}

/// Analytic model of the column: `Bi(n, 0.25)` operands, the circuit's
/// `Δ_imc` and `σ_a = σ_adc`.
pub fn column_params(circuit: &CircuitParams, n: usize) -> Result<AimcParams> {
    AimcParams::new(DotProductPmf::binomial(n, 0.25)?, delta_imc(circuit, n)?, circuit.sigma_adc)
}

/// One draw of the operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotProductSample {
    pub w: Vec<bool>,
    pub x: Vec<bool>,
    pub y_ideal: usize,
}

// n fair bits packed into 64-bit words, the unused high bits cleared
fn fill_bits<R: RngCore>(rng: &mut R, n: usize, words: &mut [u64]) {
    for wd in words.iter_mut() {
        *wd = rng.next_u64();
    }
    let rem = n % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

fn unpack(words: &[u64], n: usize) -> Vec<bool> {
    (0..n).map(|i| words[i / 64] >> (i % 64) & 1 == 1).collect()
}

/// Draws `w, x` with i.i.d. fair bits and their dot product.
pub fn sample_dot_product<R: RngCore>(n: usize, rng: &mut R) -> DotProductSample {
    let words = n.div_ceil(64);
    let mut w = vec![0u64; words];
    let mut x = vec![0u64; words];
    fill_bits(rng, n, &mut w);
    fill_bits(rng, n, &mut x);
    let y_ideal = w.iter().zip(&x).map(|(a, b)| (a & b).count_ones() as usize).sum();
    DotProductSample { w: unpack(&w, n), x: unpack(&x, n), y_ideal }
}

/// Outcome of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    /// `Var(y_ideal) / mean((y_imc − y_ideal)²)` in dB, `+∞` without errors.
    pub csnr_db_empirical: f64,
    /// `mean(y_imc − y_ideal)`.
    pub mean_error: f64,
    /// `mean((y_imc − y_ideal)²)`.
    pub mse_empirical: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// A column instance: circuit, ADC and digital offset, with the capacitor
/// mismatch already drawn.
#[derive(Debug, Clone)]
pub struct Column {
    n: usize,
    delta_imc: f64,
    sigma_adc: f64,
    adc: Adc,
    mu_off: f64,
    // bitline volts contributed by each active cell; None when all cells match
    cell_volts: Option<Vec<f64>>,
}

impl Column {
    /// Builds the column, drawing per-cell capacitances from the mismatch
    /// stream of `seed`. The offset is the analytic `μ_off` for the nominal
    /// circuit.
    pub fn new(circuit: &CircuitParams, n: usize, adc: Adc, seed: u64) -> Result<Self> {
        let mu_off = evaluate(&column_params(circuit, n)?, &adc).mu_off;
        Self::with_offset(circuit, n, adc, mu_off, seed)
    }

    /// As [`Column::new`] with an explicit digital offset.
    pub fn with_offset(circuit: &CircuitParams, n: usize, adc: Adc, mu_off: f64, seed: u64) -> Result<Self> {
        let delta = delta_imc(circuit, n)?;
        let cell_volts = if circuit.sigma_cap_rel > 0.0 {
            let mut rng = stream(seed, MISMATCH_STREAM);
            let dist = Normal::new(1.0, circuit.sigma_cap_rel).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            // a cell cannot have negative capacitance
            let caps: Vec<f64> = (0..n).map(|_| circuit.c_cell * dist.sample(&mut rng).max(0.0)).collect();
            let total: f64 = caps.iter().sum::<f64>() + circuit.c_par;
            Some(caps.iter().map(|c| circuit.v_dd * c / total).collect())
        } else {
            None
        };
        Ok(Column { n, delta_imc: delta, sigma_adc: circuit.sigma_adc, adc, mu_off, cell_volts })
    }

    pub fn mu_off(&self) -> f64 {
        self.mu_off
    }

    pub fn delta_imc(&self) -> f64 {
        self.delta_imc
    }

    pub fn adc(&self) -> &Adc {
        &self.adc
    }

    /// Noiseless bitline voltage for packed operands.
    fn ideal_volts(&self, w: &[u64], x: &[u64]) -> (usize, f64) {
        let mut y = 0usize;
        let mut v = 0.0;
        for (i, (a, b)) in w.iter().zip(x).enumerate() {
            let mut on = a & b;
            y += on.count_ones() as usize;
            if let Some(cells) = &self.cell_volts {
                while on != 0 {
                    v += cells[i * 64 + on.trailing_zeros() as usize];
                    on &= on - 1;
                }
            }
        }
        if self.cell_volts.is_none() {
            v = y as f64 * self.delta_imc;
        }
        (y, v)
    }

    fn run_partition(&self, samples: u64, rng: &mut ChaCha8Rng, mut visit: impl FnMut(usize, f64)) {
        let words = self.n.div_ceil(64);
        let mut w = vec![0u64; words];
        let mut x = vec![0u64; words];
        for _ in 0..samples {
            fill_bits(rng, self.n, &mut w);
            fill_bits(rng, self.n, &mut x);
            let (y, v) = self.ideal_volts(&w, &x);
            let z: f64 = StandardNormal.sample(rng);
            visit(y, v + self.sigma_adc * z);
        }
    }

    /// Runs `n_samples` draws split over [`PARTITIONS`] streams of `seed`.
    pub fn simulate(&self, n_samples: u64, seed: u64) -> Result<SimReport> {
        if n_samples < 1 {
            return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
        }
        let parts: Vec<Partial> = (0..PARTITIONS)
            .into_par_iter()
            .map(|part| {
                let mut rng = stream(seed, part);
                let mut acc = Partial::default();
                self.run_partition(partition_len(n_samples, part), &mut rng, |y, v| {
                    let e = self.adc.quantize(v) / self.delta_imc - self.mu_off - y as f64;
                    acc.push(y as u64, e);
                });
                acc
            })
            .collect();
        let total = parts.into_iter().fold(Partial::default(), Partial::merge);
        Ok(total.report(seed))
    }

    /// Pre-ADC voltages `V + η` of `n_samples` draws, in stream order.
    pub fn pre_adc_samples(&self, n_samples: u64, seed: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_samples as usize);
        for part in 0..PARTITIONS {
            let mut rng = stream(seed, part);
            self.run_partition(partition_len(n_samples, part), &mut rng, |_, v| out.push(v));
        }
        out
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn partition_len(n_samples: u64, part: u64) -> u64 {
    n_samples / PARTITIONS + u64::from(part < n_samples % PARTITIONS)
}

#[derive(Debug, Default, Clone, Copy)]
struct Partial {
    count: u64,
    sum_y: u64,
    sum_y2: u64,
    sum_e: f64,
    sum_e2: f64,
}

impl Partial {
    fn push(&mut self, y: u64, e: f64) {
        self.count += 1;
        self.sum_y += y;
        self.sum_y2 += y * y;
        self.sum_e += e;
        self.sum_e2 += e * e;
    }

    fn merge(self, o: Partial) -> Partial {
        Partial {
            count: self.count + o.count,
            sum_y: self.sum_y + o.sum_y,
            sum_y2: self.sum_y2 + o.sum_y2,
            sum_e: self.sum_e + o.sum_e,
            sum_e2: self.sum_e2 + o.sum_e2,
        }
    }

    fn report(&self, seed: u64) -> SimReport {
        let n = self.count as f64;
        // the integer sums are exact; only the final division rounds
        let mean_y = self.sum_y as f64 / n;
        let var_y = if self.count > 1 {
            (self.sum_y2 as f64 - self.sum_y as f64 * mean_y) / (n - 1.0)
        } else {
            0.0
        };
        let mse = self.sum_e2 / n;
        SimReport {
            csnr_db_empirical: ratio_db(var_y, mse),
            mean_error: self.sum_e / n,
            mse_empirical: mse,
            n_samples: self.count,
            seed,
        }
    }
}

/// Empirical CSNR of a column with the given ADC, encoded with the analytic
/// `μ_off`.
pub fn simulate_csnr(circuit: &CircuitParams, n: usize, adc: &Adc, n_samples: u64, seed: u64) -> Result<SimReport> {
    Column::new(circuit, n, adc.clone(), seed)?.simulate(n_samples, seed)
}

