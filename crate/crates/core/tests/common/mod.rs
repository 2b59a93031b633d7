//! Naive reference implementations shared by the integration tests.
#![allow(dead_code)]

use slseg::models::{DataPanel, SegmentTriple};
use slseg::{Model, ScoreParams};

/// `h_1 = 1`, `h_{i+1} = ceil(11 h_i / 10)`, `d_i = max(1, floor(h_i / i))`,
/// in integer arithmetic, all scales with `h_i <= len`.
pub fn naive_schedule(len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut h = 1usize;
    let mut i = 1usize;
    while h <= len {
        out.push((h, (h / i).max(1)));
        h = ((11 * h).div_ceil(10)).max(h + 1);
        i += 1;
    }
    out
}

pub fn row_pvalue(panel: &DataPanel, model: Model, seed: u64, n: usize, s: usize, t: usize, u: usize) -> f64 {
    let tr = SegmentTriple::new(s, t, u);
    match model {
        Model::Normal => panel.normal_pvalue(n, tr).unwrap().1,
        Model::Poisson => panel.poisson_pvalue(n, tr, seed).unwrap(),
    }
}

pub fn naive_penalized(
    panel: &DataPanel,
    model: Model,
    seed: u64,
    params: &ScoreParams,
    s: usize,
    t: usize,
    u: usize,
) -> f64 {
    let mut raw = 0.0;
    for n in 0..panel.n_sequences() {
        raw += slseg::score::sl_term(row_pvalue(panel, model, seed, n, s, t, u), params).unwrap();
    }
    let total = panel.length() as f64;
    raw - (0.25 * total * (1.0 / (t - s) as f64 + 1.0 / (u - t) as f64)).ln()
}

/// Literal transcription of the single change-point search on `X_{b:e}`
/// (1-based, inclusive) starting at scale `i0`.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_estimate(
    panel: &DataPanel,
    model: Model,
    seed: u64,
    params: &ScoreParams,
    critical: f64,
    i0: usize,
    b: usize,
    e: usize,
) -> Option<(usize, usize)> {
    let g = e - b + 1;
    let sched = naive_schedule(panel.length());
    // i_g over the schedule truncated at the full length
    let i_t = (1..=sched.len()).filter(|&i| sched[i - 1].0 + sched[i - 1].1 <= panel.length()).max()?;
    let i_g = (1..=i_t).filter(|&i| sched[i - 1].0 + sched[i - 1].1 <= g).max().unwrap_or(0);
    let off = b - 1;
    let mut i = i0.max(1);
    while i <= i_g {
        let (h, d) = sched[i - 1];
        let k_max = (g - 1) / d;
        let mut best = f64::NEG_INFINITY;
        let mut j = 0;
        for k in 1..=k_max {
            let (s, t, u) = ((k * d).saturating_sub(h), k * d, (k * d + h).min(g));
            let v = naive_penalized(panel, model, seed, params, s + off, t + off, u + off);
            if v > best {
                best = v;
                j = k;
            }
        }
        if k_max > 0 && best >= critical {
            let (s, u) = ((j * d).saturating_sub(h), (j * d + h).min(g));
            let mut best_t = 0;
            let mut best_v = f64::NEG_INFINITY;
            for t in s + 1..u {
                let v = naive_penalized(panel, model, seed, params, s + off, t + off, u + off);
                if v > best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            return Some((best_t + b - 1, i));
        }
        i += 1;
    }
    None
}

/// Kolmogorov–Smirnov distance of a sample from Uniform(0, 1).
pub fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Binomial probabilities by the multiplicative recurrence.
pub fn binomial_pmf_table(y: u64, prob: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; y as usize + 1];
    pmf[0] = (1.0 - prob).powi(y as i32);
    for k in 1..=y as usize {
        pmf[k] = pmf[k - 1] * (y as usize - k + 1) as f64 / k as f64 * prob / (1.0 - prob);
    }
    pmf
}
