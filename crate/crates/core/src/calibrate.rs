//! Monte-Carlo calibration of critical values on null panels.
//!
//! On a change-free panel the detector reports anything iff its first
//! screening sweep triggers, which happens iff the largest screening score
//! over all scales reaches the critical value. One sweep per replication
//! therefore calibrates every grid value at once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Model, SlConfig};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::segment::{prepare_panel, Detector};
use crate::simulate::{noise_panel, poisson_noise_panel};
use crate::windows::WindowSchedule;

pub const MIN_REPLICATIONS: usize = 100;

/// Dimensions of the simulated null panels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullDesign {
    pub n_sequences: usize,
    pub length: usize,
    /// Common rate of the Poisson null; ignored for the normal model.
    pub poisson_rate: f64,
}

impl NullDesign {
    pub fn new(n_sequences: usize, length: usize) -> Self {
        NullDesign { n_sequences, length, poisson_rate: 5.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub critical_values: Vec<f64>,
    pub type1_raw: Vec<f64>,
    pub type1_monotone: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_reps: usize,
    pub model: Model,
    pub n_sequences: usize,
    pub length: usize,
    /// Largest screening score of each replication.
    pub max_scores: Vec<f64>,
}

impl CalibrationCurve {
    /// Curve from per-replication maximal scores.
    pub fn from_max_scores(design: &NullDesign, model: Model, grid: &[f64], max_scores: Vec<f64>) -> Self {
        let reps = max_scores.len() as f64;
        let type1_raw: Vec<f64> = grid
            .iter()
            .map(|&c| max_scores.iter().filter(|&&m| m >= c).count() as f64 / reps)
            .collect();
        let stderr = type1_raw.iter().map(|&p| (p * (1.0 - p) / reps).sqrt()).collect();
        CalibrationCurve {
            critical_values: grid.to_vec(),
            type1_monotone: antitonic_regression(&type1_raw),
            type1_raw,
            stderr,
            n_reps: max_scores.len(),
            model,
            n_sequences: design.n_sequences,
            length: design.length,
            max_scores,
        }
    }

    /// Rows `c,type1_raw,type1_monotone,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,type1_raw,type1_monotone,stderr\n");
        for i in 0..self.critical_values.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.critical_values[i], self.type1_raw[i], self.type1_monotone[i], self.stderr[i]
            ));
        }
        out
    }
}

/// Least-squares nonincreasing fit (pool adjacent violators).
pub fn antitonic_regression(values: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            blocks.push(((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w));
        }
    }
    blocks.into_iter().flat_map(|(m, w)| std::iter::repeat_n(m, w)).collect()
}

/// Largest screening score over one simulated null panel.
pub fn null_max_score(design: &NullDesign, cfg: &SlConfig, seed: u64) -> Result<f64> {
    let panel = match cfg.model {
        Model::Normal => noise_panel(design.n_sequences, design.length, seed),
        Model::Poisson => poisson_noise_panel(design.n_sequences, design.length, design.poisson_rate, seed),
    };
    let panel = prepare_panel(&panel, cfg)?;
    let run_cfg = cfg.clone().with_seed(seed);
    Ok(Detector::new(&panel, &run_cfg)?.max_screen_score())
}

/// Estimates P(at least one reported change-point) on null panels for every
/// critical value in `grid`.
pub fn calibrate_null(
    design: &NullDesign,
    cfg: &SlConfig,
    grid: &[f64],
    n_reps: usize,
    seed: u64,
) -> Result<CalibrationCurve> {
    if n_reps < MIN_REPLICATIONS {
        return Err(Error::Config(format!("need at least {MIN_REPLICATIONS} replications, got {n_reps}")));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|c| !c.is_finite()) {
        return Err(Error::Config("critical-value grid must be finite and strictly increasing".into()));
    }
    design.model_ok(cfg.model)?;
    let max_scores = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| null_max_score(design, cfg, derive_seed(seed, rep)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CalibrationCurve::from_max_scores(design, cfg.model, grid, max_scores))
}

impl NullDesign {
    fn model_ok(&self, model: Model) -> Result<()> {
        let rate_ok = model == Model::Normal || (self.poisson_rate > 0.0 && self.poisson_rate.is_finite());
        if self.n_sequences == 0 || self.length == 0 || !rate_ok {
            return Err(Error::Config(format!("invalid null design {self:?}")));
        }
        Ok(())
    }
}

/// Smallest grid value whose monotone Type-I error is at most `alpha`.
pub fn find_critical(curve: &CalibrationCurve, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    curve
        .critical_values
        .iter()
        .zip(&curve.type1_monotone)
        .find(|(_, &err)| err <= alpha)
        .map(|(&c, _)| c)
        .ok_or_else(|| Error::Unreachable {
            alpha,
            min_error: curve.type1_monotone.iter().copied().fold(f64::INFINITY, f64::min),
        })
}

/// Union bound `2 e^{-c} Σ h_i/d_i` on the null Type-I error.
pub fn markov_envelope(schedule: &WindowSchedule, critical: f64) -> f64 {
    2.0 * schedule.window_weight() * (-critical).exp()
}
