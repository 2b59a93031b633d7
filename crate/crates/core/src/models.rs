//! Data panels and the per-sequence p-value engines.

use serde::{Deserialize, Serialize};

use crate::config::Model;
use crate::dist::{self, P_FLOOR};
use crate::error::{Error, Result};
use crate::rng::keyed_uniform;

/// Window `(s, t, u)` in prefix coordinates: the left segment holds
/// observations `s+1..=t`, the right segment `t+1..=u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentTriple {
    pub s: usize,
    pub t: usize,
    pub u: usize,
}

impl SegmentTriple {
    pub fn new(s: usize, t: usize, u: usize) -> Self {
        SegmentTriple { s, t, u }
    }

    pub fn offset(self, by: usize) -> Self {
        SegmentTriple { s: self.s + by, t: self.t + by, u: self.u + by }
    }

    fn check(self, limit: usize) -> Result<Self> {
        if self.s < self.t && self.t < self.u && self.u <= limit {
            Ok(self)
        } else {
            Err(Error::IndexOrder { s: self.s, t: self.t, u: self.u, limit })
        }
    }
}

/// `N x T` matrix of observations with per-row prefix sums.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPanel {
    n_sequences: usize,
    length: usize,
    values: Vec<f64>,
    // row n occupies prefix[n * (length + 1) ..][..length + 1]
    prefix: Vec<f64>,
}

impl DataPanel {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_sequences = rows.len();
        if n_sequences == 0 {
            return Err(Error::InvalidPanel("panel has no sequences".into()));
        }
        let length = rows[0].len();
        if let Some(bad) = rows.iter().position(|r| r.len() != length) {
            return Err(Error::InvalidPanel(format!(
                "row {bad} has {} values, expected {length}",
                rows[bad].len()
            )));
        }
        Self::from_flat(n_sequences, length, rows.into_iter().flatten().collect())
    }

    /// Row-major `values` of shape `n_sequences x length`.
    pub fn from_flat(n_sequences: usize, length: usize, values: Vec<f64>) -> Result<Self> {
        if n_sequences == 0 || length == 0 {
            return Err(Error::InvalidPanel("panel must have at least one row and one column".into()));
        }
        if values.len() != n_sequences * length {
            return Err(Error::InvalidPanel(format!(
                "expected {} values, got {}",
                n_sequences * length,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPanel(format!(
                "non-finite value at row {}, column {}",
                pos / length,
                pos % length
            )));
        }
        let mut prefix = Vec::with_capacity(n_sequences * (length + 1));
        for row in values.chunks_exact(length) {
            let mut acc = 0.0;
            prefix.push(0.0);
            for &v in row {
                acc += v;
                prefix.push(acc);
            }
        }
        Ok(DataPanel { n_sequences, length, values, prefix })
    }

    pub fn n_sequences(&self) -> usize {
        self.n_sequences
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.length..(n + 1) * self.length]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.length)
    }

    /// Cumulative sums of row `n`, `length + 1` entries starting at 0.
    pub fn prefix(&self, n: usize) -> &[f64] {
        let w = self.length + 1;
        &self.prefix[n * w..(n + 1) * w]
    }

    /// Errors unless every value is a nonnegative integer.
    pub fn require_counts(&self) -> Result<()> {
        for (pos, &v) in self.values.iter().enumerate() {
            if v < 0.0 || v.fract() != 0.0 || v > 2f64.powi(53) {
                return Err(Error::NonCount { row: pos / self.length, col: pos % self.length, value: v });
            }
        }
        Ok(())
    }

    fn check_row(&self, n: usize) -> Result<()> {
        if n >= self.n_sequences {
            return Err(Error::SequenceIndex { index: n, n_sequences: self.n_sequences });
        }
        Ok(())
    }

    #[inline]
    fn sum(&self, n: usize, s: usize, t: usize) -> f64 {
        let base = n * (self.length + 1);
        self.prefix[base + t] - self.prefix[base + s]
    }

    /// Mean of observations `s+1..=t` of row `n`.
    pub fn segment_mean(&self, n: usize, s: usize, t: usize) -> Result<f64> {
        self.check_row(n)?;
        if s >= t || t > self.length {
            return Err(Error::IndexOrder { s, t, u: t, limit: self.length });
        }
        Ok(self.sum(n, s, t) / (t - s) as f64)
    }

    #[inline]
    pub(crate) fn z_unchecked(&self, n: usize, s: usize, t: usize, u: usize) -> f64 {
        let (left, right) = ((t - s) as f64, (u - t) as f64);
        let diff = self.sum(n, t, u) / right - self.sum(n, s, t) / left;
        diff / (1.0 / right + 1.0 / left).sqrt()
    }

    /// Z statistic and two-sided p-value for a mean change at `t`.
    pub fn normal_pvalue(&self, n: usize, triple: SegmentTriple) -> Result<(f64, f64)> {
        self.check_row(n)?;
        let SegmentTriple { s, t, u } = triple.check(self.length)?;
        let z = self.z_unchecked(n, s, t, u);
        Ok((z, dist::two_sided_normal(z)))
    }

    #[inline]
    pub(crate) fn poisson_unchecked(&self, seed: u64, n: usize, s: usize, t: usize, u: usize) -> f64 {
        let total = self.sum(n, s, u).round() as u64;
        let left = self.sum(n, s, t).round() as u64;
        let prob = (t - s) as f64 / (u - s) as f64;
        randomized_binomial_pvalue(total, left, prob, keyed_uniform(seed, n, s, t, u))
    }

    /// Conditional binomial p-value with randomized continuity correction.
    ///
    /// The uniform draw is keyed by `(seed, n, s, t, u)` with `triple` in
    /// absolute panel coordinates.
    pub fn poisson_pvalue(&self, n: usize, triple: SegmentTriple, seed: u64) -> Result<f64> {
        self.check_row(n)?;
        let SegmentTriple { s, t, u } = triple.check(self.length)?;
        for v in &self.row(n)[s..u] {
            if *v < 0.0 || v.fract() != 0.0 {
                let col = s + self.row(n)[s..u].iter().position(|x| x == v).unwrap_or(0);
                return Err(Error::NonCount { row: n, col, value: *v });
            }
        }
        Ok(self.poisson_unchecked(seed, n, s, t, u))
    }

    /// P-value of row `n` under `model`, in absolute coordinates, no checks.
    #[inline]
    pub(crate) fn pvalue_unchecked(&self, model: Model, seed: u64, n: usize, s: usize, t: usize, u: usize) -> f64 {
        match model {
            Model::Normal => dist::two_sided_normal(self.z_unchecked(n, s, t, u)),
            Model::Poisson => self.poisson_unchecked(seed, n, s, t, u),
        }
    }

    /// Divides every row by its MAD-of-differences scale estimate.
    pub fn mad_normalize(&self) -> Result<DataPanel> {
        let mut values = Vec::with_capacity(self.values.len());
        for (n, row) in self.rows().enumerate() {
            let sigma = mad_scale(row).ok_or(Error::DegenerateRow(n))?;
            values.extend(row.iter().map(|v| v / sigma));
        }
        DataPanel::from_flat(self.n_sequences, self.length, values)
    }
}

/// `median(|x_{t+1} - x_t|) / (sqrt(2) Φ^{-1}(3/4))`; `None` when the median is
/// zero or the row has fewer than two observations.
pub fn mad_scale(row: &[f64]) -> Option<f64> {
    if row.len() < 2 {
        return None;
    }
    let mut diffs: Vec<f64> = row.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let m = diffs.len();
    let mid = m / 2;
    let (_, &mut upper, _) = diffs.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower = diffs[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if median > 0.0 {
        Some(median / (std::f64::consts::SQRT_2 * dist::std_normal_quantile(0.75)))
    } else {
        None
    }
}

/// Randomized two-sided p-value of `k` successes out of `total` trials with
/// success probability `prob`.
///
/// `V = P(X <= k-1) + U P(X = k)` is exactly uniform under the binomial law;
/// the p-value is `2 min(V, 1 - V)` with both tails evaluated directly.
pub fn randomized_binomial_pvalue(total: u64, k: u64, prob: f64, uniform: f64) -> f64 {
    let pmf = dist::binomial_pmf(total, k, prob);
    let lower = dist::binomial_cdf_below(total, k, prob) + uniform * pmf;
    let upper = dist::binomial_sf_above(total, k, prob) + (1.0 - uniform) * pmf;
    (2.0 * lower.min(upper)).clamp(P_FLOOR, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn panel(rows: &[&[f64]]) -> DataPanel {
        DataPanel::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn segment_means() {
        let p = panel(&[&[1.0, 2.0, 3.0, 4.0], &[7.0; 4]]);
        assert_eq!(p.segment_mean(0, 0, 2).unwrap(), 1.5);
        assert_eq!(p.segment_mean(0, 2, 4).unwrap(), 3.5);
        assert_eq!(p.segment_mean(1, 1, 3).unwrap(), 7.0);
        assert!(p.segment_mean(0, 2, 2).is_err());
        assert!(p.segment_mean(0, 0, 5).is_err());
        assert!(p.segment_mean(2, 0, 1).is_err());
    }

    #[test]
    fn prefix_starts_at_zero() {
        let p = panel(&[&[1.0, -2.0, 3.5]]);
        assert_eq!(p.prefix(0), &[0.0, 1.0, -1.0, 2.5]);
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(DataPanel::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(DataPanel::from_rows(vec![vec![1.0, f64::NAN]]).is_err());
        assert!(DataPanel::from_rows(vec![]).is_err());
    }

    #[test]
    fn normal_pvalue_examples() {
        let p = panel(&[&[3.0; 6]]);
        let (z, pv) = p.normal_pvalue(0, SegmentTriple::new(0, 2, 6)).unwrap();
        assert_eq!((z, pv), (0.0, 1.0));

        // left mean 0 over 4, right mean m over 2: Z = m / sqrt(1/2 + 1/4)
        let m = 2.0 * (0.75f64).sqrt();
        let q = panel(&[&[0.0, 0.0, 0.0, 0.0, m, m]]);
        let (z, pv) = q.normal_pvalue(0, SegmentTriple::new(0, 4, 6)).unwrap();
        assert!((z - 2.0).abs() < 1e-12);
        assert!((pv - 0.045_500_263_896_358_42).abs() < 1e-10);
        assert!(q.normal_pvalue(0, SegmentTriple::new(0, 6, 6)).is_err());
        assert!(q.normal_pvalue(0, SegmentTriple::new(0, 3, 7)).is_err());
    }

    #[test]
    fn randomized_pvalue_examples() {
        // Bin(2, 1/2), k = 0, U = 0.5: V = 0.125
        assert!((randomized_binomial_pvalue(2, 0, 0.5, 0.5) - 0.25).abs() < 1e-15);
        // empty total: V = U
        for u in [0.1f64, 0.5, 0.8] {
            let expected = 2.0 * u.min(1.0 - u);
            assert!((randomized_binomial_pvalue(0, 0, 0.3, u) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn poisson_pvalue_rejects_fractional_counts() {
        let p = panel(&[&[1.0, 2.5, 3.0, 1.0]]);
        assert!(matches!(
            p.poisson_pvalue(0, SegmentTriple::new(0, 2, 4), 1),
            Err(Error::NonCount { row: 0, col: 1, .. })
        ));
        assert!(p.require_counts().is_err());
        assert!(panel(&[&[0.0, 3.0]]).require_counts().is_ok());
        assert!(panel(&[&[-1.0, 3.0]]).require_counts().is_err());
    }

    #[test]
    fn mad_scale_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let row: Vec<f64> = (0..10_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let sigma = mad_scale(&row).unwrap();
        assert!((0.97..=1.03).contains(&sigma), "{sigma}");
        let scaled: Vec<f64> = row.iter().map(|v| 5.0 * v).collect();
        assert!((mad_scale(&scaled).unwrap() - 5.0 * sigma).abs() < 1e-12 * sigma);
        assert!(mad_scale(&[2.0; 10]).is_none());
        let p = panel(&[&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]]);
        assert_eq!(p.mad_normalize(), Err(Error::DegenerateRow(1)));
    }

    #[test]
    fn normalization_makes_pipeline_scale_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let row: Vec<f64> = (0..400).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let scaled: Vec<f64> = row.iter().map(|v| 7.5 * v + 3.0).collect();
        let a = DataPanel::from_rows(vec![row]).unwrap().mad_normalize().unwrap();
        let b = DataPanel::from_rows(vec![scaled]).unwrap().mad_normalize().unwrap();
        for t in [10, 100, 250] {
            let tr = SegmentTriple::new(t - 10, t, t + 40);
            let (_, pa) = a.normal_pvalue(0, tr).unwrap();
            let (_, pb) = b.normal_pvalue(0, tr).unwrap();
            assert!((pa - pb).abs() < 1e-9, "{pa} {pb}");
        }
    }

    proptest! {
        #[test]
        fn prefix_means_match_naive(row in prop::collection::vec(-1e3f64..1e3, 2..80), a in 0usize..80, b in 0usize..80) {
            let len = row.len();
            let (s, t) = (a % len, b % len + 1);
            prop_assume!(s < t);
            let p = DataPanel::from_rows(vec![row.clone()]).unwrap();
            let naive = row[s..t].iter().sum::<f64>() / (t - s) as f64;
            let fast = p.segment_mean(0, s, t).unwrap();
            prop_assert!((fast - naive).abs() <= 1e-10 * naive.abs().max(1.0));
        }
    }
}
