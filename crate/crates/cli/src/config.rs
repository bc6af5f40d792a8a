//! Flat `key = value` run configuration.
//!
//! ```text
//! # precision sweep at low noise
//! n = 256
//! sigma_adc = 0.5e-3
//! b_adc = 1..10
//! ```
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys, repeated keys
//! and malformed values are parse errors that name the key.

use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use aimc_adc_core::{AimcParams, DotProductPmf, Scheme};

use crate::simulator::{delta_imc, CircuitParams};
use crate::CliError;

/// Where the dot-product distribution comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// `y ~ Bi(n, p)`.
    Binomial { p: f64 },
    /// Explicit probabilities for `y = 0..n`, read from a file.
    Pmf { path: PathBuf, probs: Vec<f64> },
}

/// How `Δ_imc` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaImc {
    Volts(f64),
    Circuit,
}

/// Which schemes a command runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeChoice {
    One(Scheme),
    All,
}

/// A parsed configuration. Values not given in the file keep the defaults
/// of [`RunConfig::default`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub distribution: Distribution,
    pub delta_imc: DeltaImc,
    pub circuit: CircuitParams,
    pub b_adc: RangeInclusive<u32>,
    pub scheme: SchemeChoice,
    pub n_samples: u64,
    pub seed: u64,
    pub csnr_spec_db: Option<f64>,
    pub surface_t1: Option<(f64, f64)>,
    pub surface_tm: Option<(f64, f64)>,
    pub surface_t1_points: usize,
    pub surface_tm_points: usize,
    /// Added to the analytic `μ_off` before simulating. Only for checking
    /// that `validate` catches a miscalibrated offset.
    pub mu_off_shift: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 0,
            distribution: Distribution::Binomial { p: 0.25 },
            delta_imc: DeltaImc::Circuit,
            circuit: CircuitParams::default(),
            b_adc: 3..=3,
            scheme: SchemeChoice::One(Scheme::Cactus),
            n_samples: 500_000,
            seed: 0,
            csnr_spec_db: None,
            surface_t1: None,
            surface_tm: None,
            surface_t1_points: 200,
            surface_tm_points: 200,
            mu_off_shift: 0.0,
        }
    }
}

/// Parse failure tied to a key (or to a line without one).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "line {}: key '{}': {}", self.line, k, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

pub const KEYS: &[&str] = &[
    "n",
    "distribution",
    "p",
    "pmf_file",
    "delta_imc",
    "v_dd",
    "c_cell",
    "c_par",
    "sigma_cap_rel",
    "sigma_adc",
    "b_adc",
    "scheme",
    "t1",
    "delta_adc",
    "n_samples",
    "seed",
    "csnr_spec_db",
    "surface_t1_min",
    "surface_t1_max",
    "surface_tm_min",
    "surface_tm_max",
    "surface_t1_points",
    "surface_tm_points",
    "mu_off_shift",
];

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ParseError> {
    value.parse().map_err(|_| ParseError {
        line,
        key: Some(key.to_string()),
        message: format!("cannot parse '{value}'"),
    })
}

fn parse_bits(line: usize, key: &str, value: &str) -> Result<RangeInclusive<u32>, ParseError> {
    match value.split_once("..") {
        Some((lo, hi)) => {
            let lo = parse_num(line, key, lo.trim())?;
            let hi = parse_num(line, key, hi.trim_start_matches('=').trim())?;
            Ok(lo..=hi)
        }
        None => {
            let b = parse_num(line, key, value)?;
            Ok(b..=b)
        }
    }
}

impl RunConfig {
    /// Parses config text. `base` resolves a relative `pmf_file`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ParseError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut distribution: Option<(usize, String)> = None;
        let mut p: Option<f64> = None;
        let mut pmf_file: Option<(usize, String)> = None;
        let mut scheme: Option<(usize, String)> = None;
        let mut t1: Option<f64> = None;
        let mut delta_adc: Option<f64> = None;
        let mut surface = [None; 4];

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ParseError { line, key: None, message: format!("expected 'key = value', got '{content}'") });
            };
            let (key, value) = (key.trim(), value.trim());
            let err = |message: String| ParseError { line, key: Some(key.to_string()), message };
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(err("unknown key".into()));
            };
            if seen.contains(&known) {
                return Err(err("given more than once".into()));
            }
            seen.push(known);
            if value.is_empty() {
                return Err(err("missing value".into()));
            }
            match known {
                "n" => cfg.n = parse_num(line, key, value)?,
                "distribution" => distribution = Some((line, value.to_string())),
                "p" => p = Some(parse_num(line, key, value)?),
                "pmf_file" => pmf_file = Some((line, value.to_string())),
                "delta_imc" => {
                    cfg.delta_imc = if value == "circuit" {
                        DeltaImc::Circuit
                    } else {
                        DeltaImc::Volts(parse_num(line, key, value)?)
                    }
                }
                "v_dd" => cfg.circuit.v_dd = parse_num(line, key, value)?,
                "c_cell" => cfg.circuit.c_cell = parse_num(line, key, value)?,
                "c_par" => cfg.circuit.c_par = parse_num(line, key, value)?,
                "sigma_cap_rel" => cfg.circuit.sigma_cap_rel = parse_num(line, key, value)?,
                "sigma_adc" => cfg.circuit.sigma_adc = parse_num(line, key, value)?,
                "b_adc" => cfg.b_adc = parse_bits(line, key, value)?,
                "scheme" => scheme = Some((line, value.to_string())),
                "t1" => t1 = Some(parse_num(line, key, value)?),
                "delta_adc" => delta_adc = Some(parse_num(line, key, value)?),
                "n_samples" => cfg.n_samples = parse_num(line, key, value)?,
                "seed" => cfg.seed = parse_num(line, key, value)?,
                "csnr_spec_db" => cfg.csnr_spec_db = Some(parse_num(line, key, value)?),
                "surface_t1_min" => surface[0] = Some(parse_num::<f64>(line, key, value)?),
                "surface_t1_max" => surface[1] = Some(parse_num::<f64>(line, key, value)?),
                "surface_tm_min" => surface[2] = Some(parse_num::<f64>(line, key, value)?),
                "surface_tm_max" => surface[3] = Some(parse_num::<f64>(line, key, value)?),
                "surface_t1_points" => cfg.surface_t1_points = parse_num(line, key, value)?,
                "surface_tm_points" => cfg.surface_tm_points = parse_num(line, key, value)?,
                "mu_off_shift" => cfg.mu_off_shift = parse_num(line, key, value)?,
                _ => unreachable!("every key in KEYS is handled"),
            }
        }

        let missing = |key: &str, message: &str| ParseError { line: 0, key: Some(key.to_string()), message: message.to_string() };
        if !seen.contains(&"n") {
            return Err(missing("n", "required key is missing"));
        }

        cfg.distribution = match distribution.as_ref().map(|(l, v)| (*l, v.as_str())) {
            None | Some((_, "binomial")) => {
                if let Some((line, _)) = pmf_file {
                    return Err(ParseError {
                        line,
                        key: Some("pmf_file".into()),
                        message: "only valid with distribution = pmf".into(),
                    });
                }
                Distribution::Binomial { p: p.unwrap_or(0.25) }
            }
            Some((_, "pmf")) => {
                let Some((file_line, file)) = pmf_file else {
                    return Err(missing("pmf_file", "required with distribution = pmf"));
                };
                if p.is_some() {
                    return Err(missing("p", "only valid with distribution = binomial"));
                }
                let path = match base {
                    Some(dir) if Path::new(&file).is_relative() => dir.join(&file),
                    _ => PathBuf::from(&file),
                };
                let probs = read_pmf(&path).map_err(|message| ParseError {
                    line: file_line,
                    key: Some("pmf_file".into()),
                    message,
                })?;
                Distribution::Pmf { path, probs }
            }
            Some((line, other)) => {
                return Err(ParseError {
                    line,
                    key: Some("distribution".into()),
                    message: format!("unknown distribution '{other}' (expected binomial or pmf)"),
                })
            }
        };

        let scheme_err = |line: usize, message: String| ParseError { line, key: Some("scheme".into()), message };
        cfg.scheme = match scheme {
            None => {
                if t1.is_some() || delta_adc.is_some() {
                    return Err(missing("t1", "t1 and delta_adc need scheme = custom"));
                }
                SchemeChoice::One(Scheme::Cactus)
            }
            Some((_, v)) if v == "all" => SchemeChoice::All,
            Some((line, v)) if v == "custom" => match (t1, delta_adc) {
                (Some(t1), Some(delta_adc)) => SchemeChoice::One(Scheme::Custom { t1, delta_adc }),
                _ => return Err(scheme_err(line, "custom needs both t1 and delta_adc".into())),
            },
            Some((line, v)) => {
                if t1.is_some() || delta_adc.is_some() {
                    return Err(scheme_err(line, "t1 and delta_adc are only valid with scheme = custom".into()));
                }
                SchemeChoice::One(v.parse().map_err(|e: aimc_adc_core::Error| scheme_err(line, e.to_string()))?)
            }
        };

        let pair = |lo: Option<f64>, hi: Option<f64>, key: &str| match (lo, hi) {
            (None, None) => Ok(None),
            (Some(a), Some(b)) => Ok(Some((a, b))),
            _ => Err(missing(key, "give both _min and _max")),
        };
        cfg.surface_t1 = pair(surface[0], surface[1], "surface_t1_min")?;
        cfg.surface_tm = pair(surface[2], surface[3], "surface_tm_min")?;
        Ok(cfg)
    }

    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self::parse(&text, path.parent())?)
    }

    /// The column's `Δ_imc`.
    pub fn delta_imc(&self) -> Result<f64, CliError> {
        Ok(match self.delta_imc {
            DeltaImc::Volts(v) => v,
            DeltaImc::Circuit => delta_imc(&self.circuit, self.n)?,
        })
    }

    /// Analytic model of the column. The analog noise is the ADC thermal
    /// noise.
    pub fn params(&self) -> Result<AimcParams, CliError> {
        self.circuit.validate()?;
        let pmf = match &self.distribution {
            Distribution::Binomial { p } => DotProductPmf::binomial(self.n, *p)?,
            Distribution::Pmf { path, probs } => {
                if probs.len() != self.n + 1 {
                    return Err(CliError::Invalid(format!(
                        "{} has {} probabilities, n = {} needs {}",
                        path.display(),
                        probs.len(),
                        self.n,
                        self.n + 1
                    )));
                }
                DotProductPmf::new(probs.clone())?
            }
        };
        Ok(AimcParams::new(pmf, self.delta_imc()?, self.circuit.sigma_adc)?)
    }

    /// Whether the simulator's fair-bit operands and circuit law describe
    /// this configuration, so that simulation and theory are comparable.
    pub fn simulable(&self) -> bool {
        matches!(self.distribution, Distribution::Binomial { p } if p == 0.25)
            && match self.delta_imc {
                DeltaImc::Circuit => true,
                DeltaImc::Volts(v) => delta_imc(&self.circuit, self.n).is_ok_and(|d| (d - v).abs() <= 1e-9 * d),
            }
    }

    /// The configured schemes, or the four compared ones.
    pub fn schemes(&self) -> Vec<Scheme> {
        match self.scheme {
            SchemeChoice::One(s) => vec![s],
            SchemeChoice::All => Scheme::COMPARED.to_vec(),
        }
    }

    /// The single precision of a `b_adc = B` config.
    pub fn single_bits(&self) -> Result<u32, CliError> {
        let (lo, hi) = (*self.b_adc.start(), *self.b_adc.end());
        if lo == hi {
            Ok(lo)
        } else {
            Err(CliError::Invalid(format!("b_adc = {lo}..{hi}: this command needs a single precision")))
        }
    }
}

/// Reads probabilities separated by whitespace, commas or newlines; `#`
/// starts a comment.
fn read_pmf(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    text.lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("cannot parse probability '{t}'")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse("n = 128\n", None).unwrap();
        assert_eq!(c.n, 128);
        assert_eq!(c.distribution, Distribution::Binomial { p: 0.25 });
        assert_eq!(c.n_samples, 500_000);
        assert_eq!(c.seed, 0);
        assert_eq!(c.circuit, CircuitParams::default());
        assert!(c.simulable());
    }

    #[test]
    fn comments_ranges_and_custom() {
        let text = "# header\nn = 16 # dims\nb_adc = 1..8\nscheme = custom\nt1 = 0.01\ndelta_adc=0.02\n\n";
        let c = RunConfig::parse(text, None).unwrap();
        assert_eq!(c.b_adc, 1..=8);
        assert_eq!(c.scheme, SchemeChoice::One(Scheme::Custom { t1: 0.01, delta_adc: 0.02 }));
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("n = 16\nsigmaadc = 1e-3\n", "sigmaadc"),
            ("n = sixteen\n", "n"),
            ("n = 16\nn = 17\n", "n"),
            ("n = 16\nscheme = best\n", "scheme"),
            ("n = 16\nb_adc = 3..x\n", "b_adc"),
            ("sigma_adc = 1e-3\n", "n"),
            ("n = 16\nscheme = custom\nt1 = 0.1\n", "scheme"),
            ("n = 16\ndistribution = pmf\n", "pmf_file"),
        ];
        for (text, key) in cases {
            let e = RunConfig::parse(text, None).unwrap_err();
            assert_eq!(e.key.as_deref(), Some(key), "{text:?}: {e}");
        }
        assert!(RunConfig::parse("n 16\n", None).unwrap_err().key.is_none());
    }

    #[test]
    fn explicit_delta_breaks_simulability_only_when_it_differs() {
        let c = RunConfig::parse("n = 128\ndelta_imc = 7.03125e-3\n", None).unwrap();
        assert!(c.simulable());
        let c = RunConfig::parse("n = 16\ndelta_imc = 0.0394\n", None).unwrap();
        assert!(!c.simulable());
        let c = RunConfig::parse("n = 16\np = 0.5\n", None).unwrap();
        assert!(!c.simulable());
    }
}
