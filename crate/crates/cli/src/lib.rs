//! Front end for the `slseg` change-point library: data ingestion, config
//! resolution and the `detect`, `calibrate`, `simulate` and `boundary`
//! subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{load_simulation, parse_grid, run_boundary, run_calibrate, run_detect, run_simulate, write_output};
use crate::config::{CommonArgs, RunConfig};
use crate::error::Result;

#[derive(Parser, Debug)]
#[command(name = "slseg", version, about = "Sparsity-likelihood change-point detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Segment a panel (rows = sequences, columns = time) and write a JSON report.
    Detect {
        /// Comma- or tab-separated table.
        input: PathBuf,
        /// First column holds row identifiers.
        #[arg(long)]
        row_ids: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Estimate the null Type-I error curve over a grid of critical values.
    Calibrate {
        #[arg(long)]
        n_sequences: usize,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// `lo:hi:step` or a comma-separated list.
        #[arg(long, default_value = "2:10:0.25")]
        grid: String,
        /// Rate of the Poisson null panels.
        #[arg(long, default_value_t = 5.0)]
        poisson_rate: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a simulation study described by a TOML scenario file.
    Simulate {
        scenario: PathBuf,
        /// Also write the summary table here.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print detection-boundary constants.
    Boundary {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        zeta: f64,
        /// Poisson rate ratio.
        #[arg(long)]
        r: Option<f64>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect { input, row_ids, common } => {
            let cfg = RunConfig::resolve(&common, row_ids)?;
            let doc = run_detect(&input, &cfg)?;
            let mut text = doc.to_json();
            text.push('\n');
            write_output(common.output.as_deref(), &text)
        }
        Command::Calibrate { n_sequences, length, reps, grid, poisson_rate, common } => {
            let cfg = RunConfig::resolve(&common, false)?;
            let grid = parse_grid(&grid)?;
            let curve = run_calibrate(&cfg, n_sequences, length, reps, &grid, poisson_rate)?;
            write_output(common.output.as_deref(), &curve.to_csv())
        }
        Command::Simulate { scenario, summary, common } => {
            let mut sim = load_simulation(&scenario)?;
            if let Some(path) = &common.config {
                // the scenario's own [config] table wins over a separate file
                sim.config = merge_files(&config::FileConfig::load(path)?, &sim.config);
            }
            finish_simulation(&sim, &common, summary.as_ref())
        }
        Command::Boundary { beta, zeta, r } => {
            let text = run_boundary(beta, zeta, r)?;
            write_output(None, &text)
        }
    }
}

fn merge_files(base: &config::FileConfig, top: &config::FileConfig) -> config::FileConfig {
    config::FileConfig {
        model: top.model.or(base.model),
        lambda1: top.lambda1.or(base.lambda1),
        lambda2: top.lambda2.or(base.lambda2),
        critical: top.critical.or(base.critical),
        seed: top.seed.or(base.seed),
        schedule_growth: top.schedule_growth.or(base.schedule_growth),
        normalize: top.normalize.or(base.normalize),
        row_ids: top.row_ids.or(base.row_ids),
    }
}

fn finish_simulation(sim: &commands::SimulationFile, overrides: &CommonArgs, summary: Option<&PathBuf>) -> Result<()> {
    let result = run_simulate(sim, overrides)?;
    let table = result.summary_csv();
    commands::write_side_file(summary, &table)?;
    match &overrides.output {
        Some(path) => {
            write_output(Some(path), &result.replications_csv()?)?;
            write_output(None, &table)
        }
        None => write_output(None, &format!("{}\n{table}", result.replications_csv()?)),
    }
}
