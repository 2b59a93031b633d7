//! Multiscale window schedules and the approximating sets of triples.

use serde::{Deserialize, Serialize};

use crate::config::{ScheduleSpec, Spacing};
use crate::error::{Error, Result};
use crate::models::SegmentTriple;

/// Half-widths `h_i` and spacings `d_i`, indexed from scale 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSchedule {
    h: Vec<usize>,
    d: Vec<usize>,
}

impl WindowSchedule {
    /// Builds the schedule and truncates it at the largest scale `i` with
    /// `h_i + d_i <= length`.
    pub fn from_spec(spec: &ScheduleSpec, length: usize) -> Self {
        let mut h = Vec::new();
        let mut d = Vec::new();
        let mut push = |hi: usize, di: usize| {
            h.push(hi);
            d.push(di.clamp(1, hi));
        };
        match *spec {
            ScheduleSpec::Geometric { h1, growth, spacing } => {
                let mut hi = h1.max(1);
                let mut i = 1usize;
                while hi <= length {
                    let di = match spacing {
                        Spacing::HOverIndex => hi / i,
                        Spacing::Unit => 1,
                    };
                    push(hi, di);
                    let next = (growth * hi as f64).ceil() as usize;
                    hi = next.max(hi + 1);
                    i += 1;
                }
            }
            ScheduleSpec::Asymptotic => {
                let mut prev = 0usize;
                let mut i = 1usize;
                loop {
                    let target = (i as f64 / (i as f64 + 2.0).ln()).exp().ceil() as usize;
                    let hi = target.max(prev + 1);
                    if hi > length {
                        break;
                    }
                    push(hi, hi / i);
                    prev = hi;
                    i += 1;
                }
            }
        }
        let mut schedule = WindowSchedule { h, d };
        let top = schedule.max_index_for(length);
        schedule.h.truncate(top);
        schedule.d.truncate(top);
        schedule
    }

    /// Explicit schedule; `h` strictly increasing, `1 <= d_i <= h_i`.
    pub fn from_parts(h: Vec<usize>, d: Vec<usize>) -> Result<Self> {
        if h.len() != d.len() {
            return Err(Error::Config("h and d must have equal length".into()));
        }
        if h.first().is_some_and(|&h1| h1 == 0) || h.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("h must be a strictly increasing sequence of positive integers".into()));
        }
        if h.iter().zip(&d).any(|(&hi, &di)| di == 0 || di > hi) {
            return Err(Error::Config("spacings must satisfy 1 <= d_i <= h_i".into()));
        }
        Ok(WindowSchedule { h, d })
    }

    /// Number of scales.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Half-width of scale `i` (1-based).
    pub fn h(&self, i: usize) -> usize {
        self.h[i - 1]
    }

    /// Spacing of scale `i` (1-based).
    pub fn d(&self, i: usize) -> usize {
        self.d[i - 1]
    }

    pub fn half_widths(&self) -> &[usize] {
        &self.h
    }

    pub fn spacings(&self) -> &[usize] {
        &self.d
    }

    /// `i_g = max{i : h_i + d_i <= g}`, or 0 when no scale fits.
    pub fn max_index_for(&self, g: usize) -> usize {
        self.h
            .iter()
            .zip(&self.d)
            .rposition(|(&hi, &di)| hi + di <= g)
            .map_or(0, |pos| pos + 1)
    }

    /// `Σ_{i} h_i / d_i` over the schedule.
    pub fn window_weight(&self) -> f64 {
        self.h.iter().zip(&self.d).map(|(&hi, &di)| hi as f64 / di as f64).sum()
    }

    /// Number of triples at scale `i` on a segment of length `g`.
    pub fn triple_count(&self, i: usize, g: usize) -> usize {
        g.saturating_sub(1) / self.d(i)
    }

    /// The `k`-th triple (1-based) of scale `i` on a segment of length `g`.
    #[inline]
    pub fn triple(&self, i: usize, k: usize, g: usize) -> SegmentTriple {
        let (h, d) = (self.h(i), self.d(i));
        let t = k * d;
        SegmentTriple { s: t.saturating_sub(h), t, u: (t + h).min(g) }
    }

    /// The approximating set of scale `i` on a segment of length `g`.
    pub fn approx_set(&self, i: usize, g: usize) -> Result<ApproxSet> {
        if i == 0 || i > self.len() {
            return Err(Error::ScaleIndex { index: i, max: self.len() });
        }
        let triples = (1..=self.triple_count(i, g)).map(|k| self.triple(i, k, g)).collect();
        Ok(ApproxSet { scale: i, triples })
    }
}

/// Window triples `(s, t, u)` screened at one scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxSet {
    pub scale: usize,
    pub triples: Vec<SegmentTriple>,
}

/// Default schedule: `h_1 = 1`, `h_{i+1} = ceil(1.1 h_i)`, `d_i = max(1, floor(h_i / i))`.
pub fn default_schedule(length: usize) -> WindowSchedule {
    WindowSchedule::from_spec(&ScheduleSpec::default(), length)
}

/// `sqrt(log T / log log T)`, with `log log T` floored at 0.1 for short series.
pub fn default_lambda2(length: usize) -> f64 {
    let ln_t = (length.max(2) as f64).ln();
    (ln_t / ln_t.ln().max(0.1)).sqrt()
}
