//! Command-line front-end: `run` a configured pipeline, `fit` measured
//! heat-capacity data, or re-render a `report` from a saved record.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod plot;
pub mod record;

use std::path::{Path, PathBuf};

use arealaw::bounds::Verdict;
use arealaw::heatfit::{certify_from_data, read_samples, DataGeometry, Regime};
use clap::{Parser, Subcommand};

use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::pipeline::{RunOptions, RunOutcome};
use crate::record::Report;

#[derive(Debug, Parser)]
#[command(name = "arealaw", version, about = "Thermal area-law certificates for small lattice models")]
pub struct Cli {
    /// Worker threads for the data-parallel loops.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Raise the Hilbert-dimension cap from 4096 to 8192.
        #[arg(long)]
        allow_large: bool,
    },
    /// Certify from measured `T,c` data.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: usize,
        /// Energy constant C ≥ 1.
        #[arg(long = "C")]
        energy_constant: f64,
        /// Coupling strength h.
        #[arg(long)]
        h: f64,
        /// Ground entropy density s(0).
        #[arg(long, default_value_t = 0.0)]
        s0: f64,
        #[arg(long, default_value = "exponential")]
        regime: String,
        /// Fit window `T_min,T_max`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
        /// Fixed energy scale of the polynomial model.
        #[arg(long, default_value_t = 1.0)]
        energy_scale: f64,
        #[arg(long, default_value = "fit_out")]
        out: PathBuf,
    },
    /// Re-render the summary and plots from a saved record.
    Report {
        /// `record.json` or the directory containing it.
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run_config(config: &Path, out: Option<&Path>, allow_large: bool) -> Result<(RunOutcome, PathBuf), CliError> {
    let loaded = LoadedConfig::load(config)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| loaded.config.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let outcome = pipeline::run(&loaded, RunOptions { allow_large, exec: None })?;
    output::write_run(&dir, &outcome, loaded.config.output.plots)?;
    Ok((outcome, dir))
}

fn load_report(path: &Path) -> Result<Report, CliError> {
    let file = if path.is_dir() { path.join(output::RECORD_JSON) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file)
        .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
    let report = value
        .get("report")
        .cloned()
        .ok_or_else(|| CliError::Validation(format!("{}: no report section", file.display())))?;
    serde_json::from_value(report).map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))
}

/// Execute a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32, CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        arealaw::exec::configure_threads(k);
    }
    match cli.command {
        Command::Run { config, out, allow_large } => {
            let (outcome, dir) = run_config(&config, out.as_deref(), allow_large)?;
            print!("{}", output::render_summary(&outcome.record.report));
            println!("outputs written to {}", dir.display());
            if pipeline::any_failure(&outcome.record) {
                eprintln!("error: a checked inequality failed");
                return Ok(2);
            }
            if let Some(msg) = outcome.unsatisfiable {
                eprintln!("error: {msg}");
                return Ok(3);
            }
            Ok(0)
        }
        Command::Fit { csv, d, r, l, n, energy_constant, h, s0, regime, window, energy_scale, out } => {
            let regime: Regime = regime.parse()?;
            let file = std::fs::File::open(&csv)
                .map_err(|e| CliError::Validation(format!("{}: {e}", csv.display())))?;
            let samples = read_samples(file).map_err(|e| CliError::Validation(format!("{}: {e}", csv.display())))?;
            let geometry = DataGeometry { d, r, l, n, energy_constant, h, s0 };
            let window = window.map(|w| (w[0], w[1]));
            let cert = certify_from_data(&samples, &geometry, regime, window, energy_scale)?;
            output::write_data_certificate(&out, &cert)?;
            print!("{}", output::render_data_certificate(&cert));
            Ok(match cert.certificate.verdict {
                Verdict::Fails => 2,
                Verdict::HypothesisNotMet => 3,
                _ => 0,
            })
        }
        Command::Report { record, out } => {
            let report = load_report(&record)?;
            let dir = out.unwrap_or_else(|| if record.is_dir() { record.clone() } else { record.parent().map(Path::to_path_buf).unwrap_or_default() });
            std::fs::create_dir_all(&dir)?;
            output::write_report(&dir, &report, true)?;
            print!("{}", output::render_summary(&report));
            Ok(0)
        }
    }
}
