//! Quantizer design and accuracy analysis for analog in-memory computing (AIMC)
//! columns.
//!
//! An AIMC column computes a binary dot product `y = w·x` as a bitline voltage
//! `y·Δ_imc`, corrupted by additive Gaussian noise and digitized by an ADC. This
//! crate evaluates the resulting compute SNR (CSNR) in closed form, searches for
//! CSNR-optimal clipping thresholds of uniform ADCs, and provides the usual
//! SQNR-oriented baselines (full-range, optimal clipping, Lloyd-Max).
//!
//! The crate is `no_std` (it needs `alloc`). Monte Carlo simulation, file
//! formats and the command-line front end live in the companion `aimc-adc-cli`
//! crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod analytic;
pub mod cactus;
pub mod dist;
mod error;
pub mod quantizer;
pub mod scheme;

pub use analytic::{AccuracyReport, AimcParams};
pub use cactus::{cactus, min_adc_precision, CactusResult, MinPrecision};
pub use dist::DotProductPmf;
pub use error::{Error, Result};
pub use quantizer::{Adc, GeneralAdc, UniformAdc};
pub use scheme::{Design, Scheme};

/// Squared errors below this are treated as exactly zero and reported as a
/// `+∞` dB ratio.
pub const ZERO_ERROR_FLOOR: f64 = 1e-18;

/// `10·log10(signal / error)`, or `+∞` when `error` is below
/// [`ZERO_ERROR_FLOOR`].
pub fn ratio_db(signal: f64, error: f64) -> f64 {
    if error < ZERO_ERROR_FLOOR {
        f64::INFINITY
    } else {
        10.0 * libm::log10(signal / error)
    }
}
