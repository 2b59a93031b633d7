//! Screen-then-refine change-point estimation and its binary segmentation
//! driver.
//!
//! Segments are addressed in prefix coordinates: `(start, end)` covers
//! observations `start+1..=end`, and a change-point at location `τ` splits
//! it into `(start, τ)` and `(τ, end)`. Reported locations therefore satisfy
//! `start < τ < end`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Model, SlConfig};
use crate::error::{Error, Result};
use crate::models::{DataPanel, SegmentTriple};
use crate::score::{multiscale_penalty, ScoreParams};
use crate::windows::WindowSchedule;

// Below this many p-value evaluations a scan stays on the calling thread.
const PAR_THRESHOLD: usize = 1 << 13;

/// A detected change-point: the last observation before the change.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub location: usize,
    /// Schedule index (1-based) of the scale whose screen triggered.
    pub scale_index: usize,
    /// Maximal screening score at that scale, at least the critical value.
    pub score: f64,
    /// Refinement window in absolute coordinates, `window.t == location`.
    pub window: SegmentTriple,
}

/// Per-sequence statistics at a change-point's refinement window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub left_sum: f64,
    pub right_sum: f64,
    pub p_value: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePointReport {
    pub location: usize,
    pub window: SegmentTriple,
    /// Unpenalized sum of the row scores.
    pub total_score: f64,
    pub penalized_score: f64,
    pub rows: Vec<RowReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    pub n_sequences: usize,
    pub length: usize,
    pub config: SlConfig,
    pub change_points: Vec<ChangePoint>,
    pub reports: Vec<ChangePointReport>,
}

impl SegmentationResult {
    pub fn locations(&self) -> Vec<usize> {
        self.change_points.iter().map(|cp| cp.location).collect()
    }
}

/// Scoring context shared by all searches over one panel.
pub struct Detector<'a> {
    panel: &'a DataPanel,
    model: Model,
    seed: u64,
    params: ScoreParams,
    schedule: WindowSchedule,
}

impl<'a> Detector<'a> {
    /// Validates the config against the panel. The panel is used as given;
    /// see [`prepare_panel`] for optional normalization.
    pub fn new(panel: &'a DataPanel, cfg: &SlConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.model == Model::Poisson {
            panel.require_counts()?;
        }
        Ok(Detector {
            panel,
            model: cfg.model,
            seed: cfg.seed,
            params: cfg.score_params(panel.n_sequences())?,
            schedule: cfg.window_schedule(panel.length()),
        })
    }

    /// Uses an explicit schedule instead of the configured one.
    pub fn with_schedule(mut self, schedule: WindowSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn schedule(&self) -> &WindowSchedule {
        &self.schedule
    }

    pub fn params(&self) -> &ScoreParams {
        &self.params
    }

    /// Summed row scores for an absolute triple.
    #[inline]
    pub fn raw_score(&self, tr: SegmentTriple) -> f64 {
        (0..self.panel.n_sequences())
            .map(|n| self.params.term(self.panel.pvalue_unchecked(self.model, self.seed, n, tr.s, tr.t, tr.u)))
            .sum()
    }

    #[inline]
    pub fn penalized(&self, tr: SegmentTriple) -> f64 {
        self.raw_score(tr) - multiscale_penalty(tr.s, tr.t, tr.u, self.panel.length())
    }

    fn scores<F>(&self, count: usize, make: F) -> Vec<f64>
    where
        F: Fn(usize) -> SegmentTriple + Sync,
    {
        if count * self.panel.n_sequences() >= PAR_THRESHOLD {
            (0..count).into_par_iter().map(|k| self.penalized(make(k))).collect()
        } else {
            (0..count).map(|k| self.penalized(make(k))).collect()
        }
    }

    /// Screening scores of scale `i` on segment `(start, end)`.
    fn screen(&self, i: usize, start: usize, end: usize) -> Vec<f64> {
        let g = end - start;
        let count = self.schedule.triple_count(i, g);
        let schedule = &self.schedule;
        self.scores(count, |k| schedule.triple(i, k + 1, g).offset(start))
    }

    /// Locates a change-point in `(start, end)` scanning scales from `i0`.
    pub fn estimate(&self, critical: f64, i0: usize, start: usize, end: usize) -> Option<ChangePoint> {
        let g = end - start;
        let top = self.schedule.max_index_for(g);
        for i in i0.max(1)..=top {
            let scores = self.screen(i, start, end);
            let Some((j, best)) = first_argmax(&scores) else { continue };
            if best < critical {
                continue;
            }
            let screen = self.schedule.triple(i, j + 1, g).offset(start);
            let (s, u) = (screen.s, screen.u);
            let refined = self.scores(u - s - 1, |m| SegmentTriple::new(s, s + 1 + m, u));
            let (m, _) = first_argmax(&refined).expect("window has an interior point");
            let location = s + 1 + m;
            return Some(ChangePoint {
                location,
                scale_index: i,
                score: best,
                window: SegmentTriple::new(s, location, u),
            });
        }
        None
    }

    /// Recursive binary segmentation over `(start, end)`.
    pub fn detect_in(&self, critical: f64, i0: usize, start: usize, end: usize) -> Vec<ChangePoint> {
        let Some(cp) = self.estimate(critical, i0, start, end) else {
            return Vec::new();
        };
        let (mut left, right) = rayon::join(
            || self.detect_in(critical, cp.scale_index, start, cp.location),
            || self.detect_in(critical, cp.scale_index, cp.location, end),
        );
        left.push(cp);
        left.extend(right);
        left
    }

    /// Largest screening score over all scales of the full series.
    pub fn max_screen_score(&self) -> f64 {
        let end = self.panel.length();
        (1..=self.schedule.max_index_for(end))
            .map(|i| self.screen(i, 0, end).into_iter().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `argmax_{0<t<T} pl(p_{0tT})`, smallest `t` on ties.
    pub fn single_changepoint(&self) -> Option<usize> {
        let end = self.panel.length();
        if end < 2 {
            return None;
        }
        let scores = self.scores(end - 1, |m| SegmentTriple::new(0, m + 1, end));
        first_argmax(&scores).map(|(m, _)| m + 1)
    }

    pub fn report(&self, cp: &ChangePoint) -> ChangePointReport {
        let tr = cp.window;
        let rows: Vec<RowReport> = (0..self.panel.n_sequences())
            .map(|n| {
                let p = self.panel.pvalue_unchecked(self.model, self.seed, n, tr.s, tr.t, tr.u);
                let prefix = self.panel.prefix(n);
                RowReport {
                    left_sum: prefix[tr.t] - prefix[tr.s],
                    right_sum: prefix[tr.u] - prefix[tr.t],
                    p_value: p,
                    score: self.params.term(p),
                }
            })
            .collect();
        let total_score: f64 = rows.iter().map(|r| r.score).sum();
        ChangePointReport {
            location: cp.location,
            window: tr,
            total_score,
            penalized_score: total_score - multiscale_penalty(tr.s, tr.t, tr.u, self.panel.length()),
            rows,
        }
    }
}

/// Index and value of the first maximum; `None` on empty input.
fn first_argmax(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (k, v)| match best {
            Some((_, b)) if v <= b => best,
            _ => Some((k, v)),
        })
}

/// Applies MAD normalization when the config asks for it.
pub fn prepare_panel(panel: &DataPanel, cfg: &SlConfig) -> Result<DataPanel> {
    if cfg.normalize {
        panel.mad_normalize()
    } else {
        Ok(panel.clone())
    }
}

/// Single change-point search on segment `b..=e` (1-based, inclusive),
/// starting at scale `i0`. Returns the location and the triggering scale.
pub fn sl_estimate(
    panel: &DataPanel,
    critical: f64,
    i0: usize,
    b: usize,
    e: usize,
    cfg: &SlConfig,
) -> Result<Option<(usize, usize)>> {
    if b == 0 || b > e || e > panel.length() {
        return Err(Error::SegmentBounds { b, e, length: panel.length() });
    }
    let det = Detector::new(panel, cfg)?;
    Ok(det.estimate(critical, i0, b - 1, e).map(|cp| (cp.location, cp.scale_index)))
}

/// Binary segmentation of the whole panel at critical value `critical`.
pub fn sl_detect(panel: &DataPanel, critical: f64, cfg: &SlConfig) -> Result<SegmentationResult> {
    let det = Detector::new(panel, cfg)?;
    let change_points = det.detect_in(critical, 1, 0, panel.length());
    let reports = change_points.iter().map(|cp| det.report(cp)).collect();
    Ok(SegmentationResult {
        n_sequences: panel.n_sequences(),
        length: panel.length(),
        config: cfg.clone().with_critical(critical),
        change_points,
        reports,
    })
}

/// Normalizes per the config, then runs [`sl_detect`] at `cfg.critical`.
pub fn detect(panel: &DataPanel, cfg: &SlConfig) -> Result<SegmentationResult> {
    let prepared = prepare_panel(panel, cfg)?;
    let mut result = sl_detect(&prepared, cfg.critical, cfg)?;
    if cfg.normalize {
        // Window sums are reported on the original scale.
        for report in &mut result.reports {
            let tr = report.window;
            for (n, row) in report.rows.iter_mut().enumerate() {
                let prefix = panel.prefix(n);
                row.left_sum = prefix[tr.t] - prefix[tr.s];
                row.right_sum = prefix[tr.u] - prefix[tr.t];
            }
        }
    }
    Ok(result)
}

/// Estimate of a single change-point known to exist.
pub fn single_changepoint(panel: &DataPanel, cfg: &SlConfig) -> Result<usize> {
    let det = Detector::new(panel, cfg)?;
    det.single_changepoint()
        .ok_or(Error::SegmentBounds { b: 1, e: panel.length(), length: panel.length() })
}
