use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::ScoreParams;
use crate::windows::{default_lambda2, WindowSchedule};

/// Observation model of a panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Unit-variance normal observations, Z-test p-values.
    Normal,
    /// Poisson counts, conditional binomial p-values.
    Poisson,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Model::Normal),
            "poisson" => Ok(Model::Poisson),
            other => Err(Error::Config(format!("unknown model '{other}'; expected normal or poisson"))),
        }
    }
}

/// Rule for the spacing `d_i` of scale `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// `d_i = max(1, floor(h_i / i))`.
    HOverIndex,
    /// `d_i = 1` at every scale (exhaustive screening).
    Unit,
}

/// How window half-widths grow with the scale index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    /// `h_1` given, `h_{i+1} = ceil(growth * h_i)`.
    Geometric { h1: usize, growth: f64, spacing: Spacing },
    /// `h_i ≈ exp(i / log i)`, `d_i ≈ h_i / i`.
    Asymptotic,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::Geometric { h1: 1, growth: 1.1, spacing: Spacing::HOverIndex }
    }
}

impl ScheduleSpec {
    pub fn validate(&self) -> Result<()> {
        if let ScheduleSpec::Geometric { h1, growth, .. } = *self {
            if h1 == 0 {
                return Err(Error::Config("h1 must be >= 1".into()));
            }
            if !(growth.is_finite() && growth > 1.0) {
                return Err(Error::Config(format!("schedule growth must be > 1, got {growth}")));
            }
        }
        Ok(())
    }
}

/// Everything the detector needs besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlConfig {
    pub model: Model,
    pub lambda1: f64,
    pub lambda2: f64,
    pub critical: f64,
    pub schedule: ScheduleSpec,
    pub seed: u64,
    pub normalize: bool,
}

pub const DEFAULT_CRITICAL: f64 = 5.0;
pub const DEFAULT_LAMBDA1: f64 = 1.0;

impl SlConfig {
    /// Defaults for a series of length `length`: λ1 = 1, λ2 from the series
    /// length, c = 5, geometric schedule with growth 1.1.
    pub fn for_length(model: Model, length: usize) -> Self {
        SlConfig {
            model,
            lambda1: DEFAULT_LAMBDA1,
            lambda2: default_lambda2(length.max(2)),
            critical: DEFAULT_CRITICAL,
            schedule: ScheduleSpec::default(),
            seed: 0,
            normalize: model == Model::Normal,
        }
    }

    pub fn with_critical(mut self, c: f64) -> Self {
        self.critical = c;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.critical.is_finite() {
            return Err(Error::Config(format!("critical value must be finite, got {}", self.critical)));
        }
        if self.model == Model::Poisson && self.normalize {
            return Err(Error::Config("normalization applies to the normal model only".into()));
        }
        self.schedule.validate()
    }

    pub fn score_params(&self, n_sequences: usize) -> Result<ScoreParams> {
        ScoreParams::new(n_sequences, self.lambda1, self.lambda2)
    }

    pub fn window_schedule(&self, length: usize) -> WindowSchedule {
        WindowSchedule::from_spec(&self.schedule, length)
    }
}
