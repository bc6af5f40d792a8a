//! ADC design schemes compared throughout the toolkit.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::string::String;

use crate::analytic::{evaluate, AccuracyReport, AimcParams};
use crate::cactus::cactus;
use crate::error::{Error, Result};
use crate::quantizer::{full_range_adc, lloyd_max, occ_adc, Adc, UniformAdc};

/// How the ADC thresholds and levels are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Levels evenly spread over the full dot-product range.
    FullRange,
    /// SQNR-optimal clipping of a uniform ADC, on the Gaussian approximation
    /// of the pre-ADC signal.
    Occ,
    /// Lloyd-Max on the Gaussian approximation (non-uniform).
    LloydMax,
    /// CSNR-optimal clipping thresholds.
    Cactus,
    /// Fixed uniform ADC.
    Custom { t1: f64, delta_adc: f64 },
}

impl Scheme {
    /// The four schemes compared in sweeps, in output order.
    pub const COMPARED: [Scheme; 4] = [Scheme::Cactus, Scheme::FullRange, Scheme::LloydMax, Scheme::Occ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::FullRange => "fr",
            Scheme::Occ => "occ",
            Scheme::LloydMax => "lm",
            Scheme::Cactus => "cactus",
            Scheme::Custom { .. } => "custom",
        }
    }

    pub fn is_baseline(&self) -> bool {
        matches!(self, Scheme::FullRange | Scheme::Occ | Scheme::LloydMax)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Parses the named schemes; `custom` needs its parameters and is built
    /// directly.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fr" => Ok(Scheme::FullRange),
            "occ" => Ok(Scheme::Occ),
            "lm" => Ok(Scheme::LloydMax),
            "cactus" => Ok(Scheme::Cactus),
            other => Err(Error::InvalidParameter(String::from(format!(
                "unknown scheme '{other}' (expected fr, occ, lm, cactus or custom)"
            )))),
        }
    }
}

/// A designed ADC and its analytic accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub scheme: Scheme,
    pub b_adc: u32,
    pub adc: Adc,
    pub report: AccuracyReport,
}

/// Builds the ADC for `scheme` at precision `b_adc` without scoring it.
pub fn design_adc(params: &AimcParams, scheme: Scheme, b_adc: u32) -> Result<Adc> {
    Ok(match scheme {
        Scheme::FullRange => full_range_adc(params.n_max(), params.delta_imc(), b_adc)?.into(),
        Scheme::Occ => {
            let g = params.gaussian_approximation();
            occ_adc(g.mean, g.sigma, b_adc)?.into()
        }
        Scheme::LloydMax => {
            let g = params.gaussian_approximation();
            lloyd_max(g.mean, g.sigma, b_adc)?.adc.into()
        }
        Scheme::Cactus => cactus(params, b_adc)?.adc.into(),
        Scheme::Custom { t1, delta_adc } => UniformAdc::new(b_adc, t1, delta_adc)?.into(),
    })
}

/// Designs and scores one scheme.
pub fn design(params: &AimcParams, scheme: Scheme, b_adc: u32) -> Result<Design> {
    let adc = design_adc(params, scheme, b_adc)?;
    let report = evaluate(params, &adc);
    Ok(Design { scheme, b_adc, adc, report })
}
