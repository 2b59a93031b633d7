//! Run settings merged from defaults, an optional TOML file and flags.
//!
//! Precedence: explicit flags, then the config file, then defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use slseg::config::{ScheduleSpec, Spacing};
use slseg::{Model, SlConfig};

use crate::error::{CliError, Result};

/// Settings that may appear in a config file. All optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<Model>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub critical: Option<f64>,
    pub seed: Option<u64>,
    pub schedule_growth: Option<f64>,
    pub normalize: Option<bool>,
    pub row_ids: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse::<Model>().map_err(|e| e.to_string())
}

/// Flags shared by the subcommands that run the detector.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// TOML file with default settings; explicit flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Observation model: normal or poisson.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<Model>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    /// Defaults to sqrt(log T / log log T).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    /// Critical value c.
    #[arg(long, allow_hyphen_values = true)]
    pub critical: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Growth factor of the window half-widths, h_{i+1} = ceil(growth h_i).
    #[arg(long)]
    pub schedule_growth: Option<f64>,
    /// Treat normal data as unit variance instead of MAD-normalizing rows.
    #[arg(long)]
    pub no_normalize: bool,
    /// Output path; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: Model,
    pub lambda1: f64,
    /// `None` selects the length-dependent default.
    pub lambda2: Option<f64>,
    pub critical: f64,
    pub seed: u64,
    pub schedule_growth: f64,
    pub normalize: bool,
    pub row_ids: bool,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, row_ids_flag: bool) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(&file, args, row_ids_flag)
    }

    pub fn merge(file: &FileConfig, args: &CommonArgs, row_ids_flag: bool) -> Result<Self> {
        let model = args.model.or(file.model).unwrap_or(Model::Normal);
        let normalize = if args.no_normalize { false } else { file.normalize.unwrap_or(model == Model::Normal) };
        let cfg = RunConfig {
            model,
            lambda1: args.lambda1.or(file.lambda1).unwrap_or(slseg::config::DEFAULT_LAMBDA1),
            lambda2: args.lambda2.or(file.lambda2),
            critical: args.critical.or(file.critical).unwrap_or(slseg::config::DEFAULT_CRITICAL),
            seed: args.seed.or(file.seed).unwrap_or(0),
            schedule_growth: args.schedule_growth.or(file.schedule_growth).unwrap_or(1.1),
            normalize,
            row_ids: row_ids_flag || file.row_ids.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda1.is_finite() && self.lambda1 >= 0.0) {
            return Err(CliError::Config(format!("lambda1 must be >= 0, got {}", self.lambda1)));
        }
        if let Some(l2) = self.lambda2 {
            if !(l2.is_finite() && l2 > 0.0) {
                return Err(CliError::Config(format!("lambda2 must be > 0, got {l2}")));
            }
        }
        if !self.critical.is_finite() {
            return Err(CliError::Config(format!("critical value must be finite, got {}", self.critical)));
        }
        if self.model == Model::Poisson && self.normalize {
            return Err(CliError::Config("normalization applies to the normal model only".into()));
        }
        Ok(())
    }

    /// Detector settings for series of length `length`.
    pub fn sl_config(&self, length: usize) -> Result<SlConfig> {
        let mut cfg = SlConfig::for_length(self.model, length).with_critical(self.critical).with_seed(self.seed);
        cfg.lambda1 = self.lambda1;
        if let Some(l2) = self.lambda2 {
            cfg.lambda2 = l2;
        }
        cfg.normalize = self.normalize;
        cfg.schedule = ScheduleSpec::Geometric { h1: 1, growth: self.schedule_growth, spacing: Spacing::HOverIndex };
        cfg.validate()?;
        Ok(cfg)
    }
}
