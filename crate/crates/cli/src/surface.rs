//! CSNR as a function of the clipping thresholds `(t1, t_M)`.

use aimc_adc_core::analytic::dot_product_error;
use aimc_adc_core::{ratio_db, AimcParams, Error, Result, UniformAdc};
use rayon::prelude::*;

/// `points` evenly spaced values from `lo` to `hi`; a single point sits at
/// `lo`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// CSNR on a `t1 × t_M` grid, row-major in `t1`. Points with `t_M ≤ t1` do
/// not describe an ADC and hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub b_adc: u32,
    pub t1: Vec<f64>,
    pub tm: Vec<f64>,
    pub csnr_db: Vec<f64>,
}

impl SurfaceGrid {
    pub fn evaluate(params: &AimcParams, b_adc: u32, t1: Vec<f64>, tm: Vec<f64>) -> Result<Self> {
        if b_adc < 2 {
            return Err(Error::InvalidParameter("a 1-bit ADC has t_M = t1; the surface needs b_adc >= 2".into()));
        }
        let var_y = params.pmf().variance();
        let csnr_db = t1
            .par_iter()
            .flat_map_iter(|&a| {
                tm.iter().map(move |&b| match UniformAdc::from_clipping(b_adc, a, b) {
                    Ok(adc) if b > a => ratio_db(var_y, dot_product_error(params, &adc).1),
                    _ => f64::NAN,
                })
            })
            .collect();
        Ok(SurfaceGrid { b_adc, t1, tm, csnr_db })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.csnr_db[i * self.tm.len() + j]
    }

    /// Grid index of the largest CSNR (first one in row-major order on ties).
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, &c) in self.csnr_db.iter().enumerate() {
            if !c.is_nan() && best.is_none_or(|(_, b)| c > b) {
                best = Some((k, c));
            }
        }
        best.map(|(k, _)| (k / self.tm.len(), k % self.tm.len()))
    }

    /// Points strictly above every valid neighbour among the eight around
    /// them.
    pub fn strict_local_maxima(&self) -> Vec<(usize, usize)> {
        let (rows, cols) = (self.t1.len(), self.tm.len());
        let mut out = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let c = self.at(i, j);
                if c.is_nan() {
                    continue;
                }
                let mut is_max = true;
                'nb: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= rows as i64 || nj >= cols as i64 {
                            continue;
                        }
                        let nc = self.at(ni as usize, nj as usize);
                        if !nc.is_nan() && nc >= c {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// ADC step of grid point `(i, j)`.
    pub fn delta_adc(&self, i: usize, j: usize) -> f64 {
        let m = (1usize << self.b_adc) - 1;
        (self.tm[j] - self.t1[i]) / (m - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aimc_adc_core::DotProductPmf;

    #[test]
    fn grid_shape_and_invalid_half() {
        let p = AimcParams::new(DotProductPmf::binomial(16, 0.25).unwrap(), 0.01, 0.001).unwrap();
        let g = SurfaceGrid::evaluate(&p, 3, linspace(0.0, 0.16, 5), linspace(0.0, 0.16, 5)).unwrap();
        assert_eq!(g.csnr_db.len(), 25);
        assert!(g.at(2, 2).is_nan() && g.at(3, 1).is_nan());
        assert!(g.at(0, 4).is_finite());
        let (i, j) = g.argmax().unwrap();
        assert!(g.tm[j] > g.t1[i]);
        assert!(SurfaceGrid::evaluate(&p, 1, vec![0.0], vec![0.1]).is_err());
    }

    #[test]
    fn linspace_ends() {
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
