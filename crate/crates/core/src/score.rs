//! Sparsity likelihood scores and the classical HC / Berk-Jones statistics.
//!
//! The sparsity likelihood of a p-value is the log of a perturbed uniform
//! density,
//!
//! ```text
//! l(p) = log(1 + a f1(p) + b f2(p)),  a = λ1 log N / N,  b = λ2 / sqrt(N log N)
//! f1(p) = 1 / (p (2 - log p)^2) - 1/2,  f2(p) = 1/sqrt(p) - 2
//! ```
//!
//! Both perturbations integrate to zero on (0, 1), so `exp(l)` is a density
//! and the summed score has an `e^{-c}` null tail.

use serde::{Deserialize, Serialize};

use crate::dist::P_FLOOR;
use crate::error::{Error, Result};

/// Clamp applied to p = 1 before the Berk-Jones log terms.
pub const BJ_UPPER_CLAMP: f64 = 1.0 - 1e-12;

fn check_p(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p > 1.0 {
        return Err(Error::PValueDomain(p));
    }
    Ok(p.max(P_FLOOR))
}

pub fn component_f1(p: f64) -> Result<f64> {
    let p = check_p(p)?;
    let l = 2.0 - p.ln();
    Ok(1.0 / (p * l * l) - 0.5)
}

pub fn component_f2(p: f64) -> Result<f64> {
    let p = check_p(p)?;
    Ok(1.0 / p.sqrt() - 2.0)
}

/// Number of sequences and the two mixing weights of the score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScoreParams", into = "RawScoreParams")]
pub struct ScoreParams {
    n_sequences: usize,
    lambda1: f64,
    lambda2: f64,
    // Derived weights: a = λ1 log N / N, b = λ2 / sqrt(N log N).
    a: f64,
    b: f64,
    ln_a: f64,
    log_space_below: f64,
}

#[derive(Serialize, Deserialize)]
struct RawScoreParams {
    n_sequences: usize,
    lambda1: f64,
    lambda2: f64,
}

impl TryFrom<RawScoreParams> for ScoreParams {
    type Error = Error;
    fn try_from(raw: RawScoreParams) -> Result<Self> {
        ScoreParams::new(raw.n_sequences, raw.lambda1, raw.lambda2)
    }
}

impl From<ScoreParams> for RawScoreParams {
    fn from(p: ScoreParams) -> Self {
        RawScoreParams { n_sequences: p.n_sequences, lambda1: p.lambda1, lambda2: p.lambda2 }
    }
}

impl ScoreParams {
    /// Validates `N >= 3`, `λ1 >= 0`, `λ2 > 0` and that the alternative
    /// density `1 + a f1 + b f2` stays positive on (0, 1]. Its minimum is
    /// attained at p = 1, where it equals `1 - a/4 - b`.
    pub fn new(n_sequences: usize, lambda1: f64, lambda2: f64) -> Result<Self> {
        if n_sequences < 3 {
            return Err(Error::InvalidScoreParams(format!(
                "need at least 3 sequences so that log N > 1, got {n_sequences}"
            )));
        }
        if !(lambda1.is_finite() && lambda1 >= 0.0) {
            return Err(Error::InvalidScoreParams(format!("lambda1 must be >= 0, got {lambda1}")));
        }
        if !(lambda2.is_finite() && lambda2 > 0.0) {
            return Err(Error::InvalidScoreParams(format!("lambda2 must be > 0, got {lambda2}")));
        }
        let n = n_sequences as f64;
        let ln_n = n.ln();
        let a = lambda1 * ln_n / n;
        let b = lambda2 / (n * ln_n).sqrt();
        if 1.0 - a / 4.0 - b <= 0.0 {
            return Err(Error::InvalidScoreParams(format!(
                "density 1 + a f1 + b f2 is not positive at p = 1 (N = {n_sequences}, \
                 lambda1 = {lambda1}, lambda2 = {lambda2})"
            )));
        }
        Ok(Self {
            n_sequences,
            lambda1,
            lambda2,
            a,
            b,
            ln_a: a.ln(),
            log_space_below: 1.0 / (n * ln_n),
        })
    }

    pub fn n_sequences(&self) -> usize {
        self.n_sequences
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Sparsity likelihood of one p-value, assuming `p` already lies in
    /// `[P_FLOOR, 1]`. This is the hot-loop entry point.
    #[inline]
    pub fn term(&self, p: f64) -> f64 {
        let sqrt_p = p.sqrt();
        if self.a > 0.0 && p < self.log_space_below {
            // Factor out the dominant a / (p L^2) term.
            let ln_p = p.ln();
            let l = 2.0 - ln_p;
            let rest = 1.0 - 0.5 * self.a - 2.0 * self.b + self.b / sqrt_p;
            let corr = p * l * l * rest / self.a;
            self.ln_a - ln_p - 2.0 * l.ln() + corr.ln_1p()
        } else {
            let l = 2.0 - p.ln();
            let f1 = 1.0 / (p * l * l) - 0.5;
            let f2 = 1.0 / sqrt_p - 2.0;
            (self.a * f1 + self.b * f2).ln_1p()
        }
    }
}

/// A vector of p-values, each in (0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct PValueVector(Vec<f64>);

impl PValueVector {
    /// Rejects entries outside (0, 1]; entries below `P_FLOOR` are clamped.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        values
            .into_iter()
            .map(check_p)
            .collect::<Result<Vec<_>>>()
            .map(PValueVector)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn sl_term(p: f64, params: &ScoreParams) -> Result<f64> {
    Ok(params.term(check_p(p)?))
}

/// Summed sparsity likelihood over all sequences.
pub fn sl_score(pvec: &PValueVector, params: &ScoreParams) -> Result<f64> {
    if pvec.len() != params.n_sequences {
        return Err(Error::LengthMismatch { expected: params.n_sequences, actual: pvec.len() });
    }
    Ok(pvec.values().iter().map(|&p| params.term(p)).sum())
}

/// Higher-criticism statistic; 0 when no order statistic has `N p(n) <= n`.
pub fn hc_score(pvec: &PValueVector) -> f64 {
    let sorted = pvec.sorted();
    let n_total = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .filter_map(|(idx, &p)| {
            let rank = (idx + 1) as f64;
            let expected = n_total * p;
            if expected > rank {
                return None;
            }
            let var = expected * (1.0 - p);
            if var <= 0.0 {
                // p = 1 forces rank = N, numerator 0
                return Some(0.0);
            }
            Some((rank - expected) / var.sqrt())
        })
        .fold(0.0, f64::max)
}

/// Berk-Jones statistic; 0 when no order statistic has `N p(n) <= n`.
pub fn bj_score(pvec: &PValueVector) -> f64 {
    let sorted = pvec.sorted();
    let n_total = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .filter_map(|(idx, &p)| {
            let p = p.min(BJ_UPPER_CLAMP);
            let rank = (idx + 1) as f64;
            if n_total * p > rank {
                return None;
            }
            let lower = rank * (rank / (n_total * p)).ln();
            let rest = n_total - rank;
            let upper = if rest > 0.0 { rest * (rest / (n_total * (1.0 - p))).ln() } else { 0.0 };
            Some(lower + upper)
        })
        .fold(0.0, f64::max)
}

/// Multiscale penalty `log((T/4) (1/(t-s) + 1/(u-t)))`.
#[inline]
pub fn multiscale_penalty(s: usize, t: usize, u: usize, total_length: usize) -> f64 {
    let inv = 1.0 / (t - s) as f64 + 1.0 / (u - t) as f64;
    (0.25 * total_length as f64 * inv).ln()
}

/// Raw score minus the multiscale penalty. `total_length` is the length of
/// the full series, also inside sub-segments.
pub fn penalized_score(raw: f64, s: usize, t: usize, u: usize, total_length: usize) -> Result<f64> {
    if !(s < t && t < u) || total_length == 0 {
        return Err(Error::IndexOrder { s, t, u, limit: total_length });
    }
    Ok(raw - multiscale_penalty(s, t, u, total_length))
}
