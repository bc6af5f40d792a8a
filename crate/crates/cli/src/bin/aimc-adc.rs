use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aimc_adc_cli::commands;
use aimc_adc_cli::{CliError, RunConfig};
use clap::{Parser, Subcommand};

/// ADC design and accuracy analysis for analog in-memory computing columns.
#[derive(Parser)]
#[command(name = "aimc-adc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (flat key = value file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; `-` or `stdout` for standard output.
    #[arg(long, global = true, default_value = "-")]
    out: String,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config's n_samples.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Worker threads for simulation and surface evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write a matplotlib script for the CSV (sweep and surface).
    #[arg(long, global = true)]
    plot_script: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Design one ADC and report its accuracy as JSON.
    Analyze,
    /// CSNR of every scheme over a range of precisions (CSV).
    Sweep,
    /// Minimum precision meeting csnr_spec_db, per scheme (CSV).
    Minbits,
    /// CSNR over a grid of clipping thresholds (CSV).
    Surface,
    /// Compare simulated and predicted CSNR; exit 1 on mismatch.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Sweep => "sweep",
            Command::Minbits => "minbits",
            Command::Surface => "surface",
            Command::Validate => "validate",
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Io("--config <path> is required".into()))?;
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = cli.samples {
        cfg.n_samples = samples;
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("--threads {threads}: {e}")))?;
    }
    let (text, passed) = match cli.command {
        Command::Analyze => (commands::analyze(&cfg)?, true),
        Command::Sweep => (commands::sweep(&cfg)?, true),
        Command::Minbits => (commands::minbits(&cfg)?, true),
        Command::Surface => (commands::surface(&cfg)?, true),
        Command::Validate => commands::validate(&cfg)?,
    };
    let to_stdout = cli.out == "-" || cli.out == "stdout";
    if to_stdout {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write output: {e}")))?;
    } else {
        std::fs::write(&cli.out, &text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", cli.out)))?;
    }
    if let Some(script_path) = &cli.plot_script {
        let csv = if to_stdout { "data.csv" } else { cli.out.as_str() };
        let script = commands::plot_script(cli.command.name(), csv).ok_or_else(|| {
            CliError::Invalid(format!("no plotting script for '{}'", cli.command.name()))
        })?;
        std::fs::write(script_path, script)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", script_path.display())))?;
    }
    if cli.command.name() == "validate" {
        eprintln!("validate: {}", if passed { "PASS" } else { "FAIL" });
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("aimc-adc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
