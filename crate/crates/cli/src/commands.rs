//! The five CLI commands. Each returns its complete output text.

use aimc_adc_core::cactus::{cactus, max_search_bits, min_precision_with, MinPrecision};
use aimc_adc_core::scheme::{design, Design};
use aimc_adc_core::{Adc, AimcParams, Scheme};

use crate::config::RunConfig;
use crate::format::{db, json, real, volts};
use crate::simulator::{Column, SimReport};
use crate::surface::{linspace, SurfaceGrid};
use crate::CliError;

/// Theory CSNR above which `validate` does not compare the estimate.
pub const VALIDATE_CSNR_CEILING_DB: f64 = 40.0;
/// Allowed gap between simulated and predicted CSNR.
pub const VALIDATE_TOLERANCE_DB: f64 = 0.5;

pub const SWEEP_HEADER: &str = "b_adc,scheme,csnr_db_theory,csnr_db_empirical,t1_volts,delta_adc_volts,mse_dp";
pub const SURFACE_HEADER: &str = "t1_volts,tM_volts,csnr_db";
pub const MINBITS_HEADER: &str = "scheme,b_min,csnr_db";
pub const VALIDATE_HEADER: &str =
    "b_adc,scheme,csnr_db_theory,csnr_db_empirical,margin_db,mean_error,mean_error_bound,status";

/// Lowest threshold and, for uniform ADCs, the step.
fn adc_geometry(adc: &Adc) -> (f64, Option<f64>) {
    match adc {
        Adc::Uniform(u) => (u.t1(), Some(u.delta_adc())),
        Adc::General(g) => (g.thresholds()[0], None),
    }
}

/// Simulates a designed ADC with the configured seed and sample count.
pub fn simulate_design(cfg: &RunConfig, d: &Design) -> Result<SimReport, CliError> {
    let column = Column::with_offset(&cfg.circuit, cfg.n, d.adc.clone(), d.report.mu_off + cfg.mu_off_shift, cfg.seed)?;
    Ok(column.simulate(cfg.n_samples, cfg.seed)?)
}

fn maybe_simulate(cfg: &RunConfig, d: &Design) -> Result<Option<SimReport>, CliError> {
    if cfg.n_samples > 0 && cfg.simulable() {
        simulate_design(cfg, d).map(Some)
    } else {
        Ok(None)
    }
}

fn single_scheme(cfg: &RunConfig) -> Result<Scheme, CliError> {
    match cfg.schemes().as_slice() {
        [s] => Ok(*s),
        _ => Err(CliError::Invalid("this command needs a single scheme".into())),
    }
}

/// One JSON object describing the design and its accuracy.
pub fn analyze(cfg: &RunConfig) -> Result<String, CliError> {
    let params = cfg.params()?;
    let d = design(&params, single_scheme(cfg)?, cfg.single_bits()?)?;
    let sim = maybe_simulate(cfg, &d)?;
    let (t1, step) = adc_geometry(&d.adc);
    let mut fields = vec![
        ("scheme", format!("\"{}\"", d.scheme)),
        ("b_adc", d.b_adc.to_string()),
        ("t1_volts", json(volts(t1))),
        ("delta_adc_volts", step.map_or("null".into(), |s| json(volts(s)))),
        ("mu_off", json(real(d.report.mu_off))),
        ("mse_dp", json(real(d.report.mse_dp))),
        ("csnr_db", json(db(d.report.csnr_db))),
        ("sqnr_db", d.report.sqnr_db.map_or("null".into(), |s| json(db(s)))),
    ];
    if let Some(s) = sim {
        fields.push(("csnr_db_empirical", json(db(s.csnr_db_empirical))));
    }
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("  \"{k}\": {v}")).collect();
    Ok(format!("{{\n{}\n}}\n", body.join(",\n")))
}

/// Every compared scheme at every precision of the configured range.
pub fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let params = cfg.params()?;
    let limit = max_search_bits(cfg.n) + 2;
    let (lo, hi) = (*cfg.b_adc.start(), *cfg.b_adc.end());
    if lo < 1 || hi < lo || hi > limit {
        return Err(CliError::Invalid(format!("b_adc = {lo}..{hi} must lie within 1..{limit} for n = {}", cfg.n)));
    }
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for b in lo..=hi {
        // COMPARED is already in name order
        for scheme in Scheme::COMPARED {
            let d = design(&params, scheme, b)?;
            let sim = maybe_simulate(cfg, &d)?;
            let (t1, step) = adc_geometry(&d.adc);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                b,
                scheme,
                db(d.report.csnr_db),
                sim.map_or(String::new(), |s| db(s.csnr_db_empirical)),
                volts(t1),
                step.map_or(String::new(), volts),
                real(d.report.mse_dp),
            ));
        }
    }
    Ok(out)
}

/// Minimum precision meeting `csnr_spec_db` for each compared scheme.
pub fn minbits(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = cfg.csnr_spec_db.ok_or_else(|| {
        CliError::Parse(crate::ParseError {
            line: 0,
            key: Some("csnr_spec_db".into()),
            message: "required by minbits".into(),
        })
    })?;
    let params = cfg.params()?;
    let mut out = String::from(MINBITS_HEADER);
    out.push('\n');
    for scheme in Scheme::COMPARED {
        let (b_min, csnr) = min_bits_for(&params, scheme, spec)?;
        let b_text = match b_min {
            MinPrecision::Bits(b) => b.to_string(),
            MinPrecision::Unattainable => "unattainable".into(),
        };
        out.push_str(&format!("{},{},{}\n", scheme, b_text, csnr.map_or(String::new(), db)));
    }
    Ok(out)
}

/// Smallest precision in `1..=⌈log2 N⌉+2` at which `scheme` reaches
/// `spec`, with the CSNR it achieves there. CACTUS cannot improve past
/// `⌈log2 N⌉`, so for it this is the same search as `min_adc_precision`.
pub fn min_bits_for(params: &AimcParams, scheme: Scheme, spec: f64) -> Result<(MinPrecision, Option<f64>), CliError> {
    let mut last = None;
    let found = min_precision_with(max_search_bits(params.n_max()) + 2, spec, |b| {
        let c = match scheme {
            Scheme::Cactus => cactus(params, b)?.csnr_max_db,
            _ => design(params, scheme, b)?.report.csnr_db,
        };
        last = Some(c);
        Ok(c)
    })?;
    Ok(match found {
        MinPrecision::Bits(_) => (found, last),
        MinPrecision::Unattainable => (found, None),
    })
}

/// The CSNR grid over `(t1, t_M)`.
pub fn surface_grid(cfg: &RunConfig) -> Result<SurfaceGrid, CliError> {
    let params = cfg.params()?;
    let b = cfg.single_bits()?;
    let full = (0.0, cfg.n as f64 * params.delta_imc());
    let (a0, a1) = cfg.surface_t1.unwrap_or(full);
    let (b0, b1) = cfg.surface_tm.unwrap_or(full);
    if cfg.surface_t1_points == 0 || cfg.surface_tm_points == 0 {
        return Err(CliError::Invalid("surface grids need at least one point per axis".into()));
    }
    Ok(SurfaceGrid::evaluate(
        &params,
        b,
        linspace(a0, a1, cfg.surface_t1_points),
        linspace(b0, b1, cfg.surface_tm_points),
    )?)
}

pub fn surface(cfg: &RunConfig) -> Result<String, CliError> {
    let g = surface_grid(cfg)?;
    let mut out = String::with_capacity(48 * g.csnr_db.len());
    out.push_str(SURFACE_HEADER);
    out.push('\n');
    for (i, t1) in g.t1.iter().enumerate() {
        for (j, tm) in g.tm.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", volts(*t1), volts(*tm), db(g.at(i, j))));
        }
    }
    Ok(out)
}

/// Outcome of one validated design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    pub b_adc: u32,
    pub scheme: Scheme,
    pub theory_db: f64,
    pub sim: SimReport,
    /// `tolerance − |empirical − theory|`, when the CSNR was compared.
    pub margin_db: Option<f64>,
    pub mean_error_bound: f64,
    pub passed: bool,
}

/// Compares simulation against theory for one design.
pub fn validate_design(cfg: &RunConfig, d: &Design) -> Result<Validation, CliError> {
    let sim = simulate_design(cfg, d)?;
    let theory = d.report.csnr_db;
    let margin = (theory <= VALIDATE_CSNR_CEILING_DB)
        .then(|| VALIDATE_TOLERANCE_DB - (sim.csnr_db_empirical - theory).abs());
    // the floor absorbs rounding in Q/Δ when no error is expected at all
    let bound = 3.0 * (d.report.mse_dp / sim.n_samples as f64).sqrt() + 1e-12;
    let mean_ok = sim.mean_error.abs() <= bound;
    let csnr_ok = margin.is_none_or(|m| m >= 0.0);
    Ok(Validation {
        b_adc: d.b_adc,
        scheme: d.scheme,
        theory_db: theory,
        sim,
        margin_db: margin,
        mean_error_bound: bound,
        passed: mean_ok && csnr_ok,
    })
}

/// Runs the configured designs through the simulator. Returns the report
/// and whether every row passed.
pub fn validate(cfg: &RunConfig) -> Result<(String, bool), CliError> {
    if !cfg.simulable() {
        return Err(CliError::Invalid(
            "validate simulates fair-bit operands: needs distribution = binomial, p = 0.25 and delta_imc from the circuit"
                .into(),
        ));
    }
    if cfg.n_samples < 1 {
        return Err(CliError::Invalid("validate needs n_samples >= 1".into()));
    }
    let params = cfg.params()?;
    let mut out = String::from(VALIDATE_HEADER);
    out.push('\n');
    let mut all = true;
    for b in cfg.b_adc.clone() {
        for scheme in cfg.schemes() {
            let v = validate_design(cfg, &design(&params, scheme, b)?)?;
            all &= v.passed;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                v.b_adc,
                v.scheme,
                db(v.theory_db),
                db(v.sim.csnr_db_empirical),
                v.margin_db.map_or(String::new(), db),
                real(v.sim.mean_error),
                real(v.mean_error_bound),
                if v.passed { "pass" } else { "fail" },
            ));
        }
    }
    Ok((out, all))
}

/// Matplotlib script that plots a `sweep` or `surface` CSV.
pub fn plot_script(command: &str, csv_path: &str) -> Option<String> {
    let body = match command {
        "sweep" => {
            "rows = list(csv.DictReader(open(PATH)))\n\
             for scheme in sorted({r['scheme'] for r in rows}):\n\
             \x20   pts = [r for r in rows if r['scheme'] == scheme]\n\
             \x20   b = [int(r['b_adc']) for r in pts]\n\
             \x20   plt.plot(b, [float(r['csnr_db_theory']) for r in pts], '--', label=scheme + ' theory')\n\
             \x20   sim = [(x, float(r['csnr_db_empirical'])) for x, r in zip(b, pts) if r['csnr_db_empirical']]\n\
             \x20   if sim:\n\
             \x20       plt.plot(*zip(*sim), 'o', label=scheme + ' simulation')\n\
             plt.xlabel('B_adc (b)')\n\
             plt.ylabel('CSNR (dB)')\n\
             plt.legend()\n"
        }
        "surface" => {
            "rows = list(csv.DictReader(open(PATH)))\n\
             t1 = sorted({float(r['t1_volts']) for r in rows})\n\
             tm = sorted({float(r['tM_volts']) for r in rows})\n\
             z = [[float('nan')] * len(t1) for _ in tm]\n\
             for r in rows:\n\
             \x20   z[tm.index(float(r['tM_volts']))][t1.index(float(r['t1_volts']))] = float(r['csnr_db'])\n\
             plt.pcolormesh([1e3 * v for v in t1], [1e3 * v for v in tm], z, shading='auto')\n\
             plt.colorbar(label='CSNR (dB)')\n\
             plt.xlabel('t1 (mV)')\n\
             plt.ylabel('tM (mV)')\n"
        }
        _ => return None,
    };
    Some(format!(
        "import csv\nimport matplotlib.pyplot as plt\n\nPATH = {csv_path:?}\n\n{body}plt.savefig(PATH.rsplit('.', 1)[0] + '.png', dpi=150)\n"
    ))
}
