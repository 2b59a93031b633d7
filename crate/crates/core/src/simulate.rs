//! Synthetic panels for the simulation studies and accuracy metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::DataPanel;

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

/// Mean shifts `amplitude / sqrt(n H_V)` for rows `n = 1..=V`.
///
/// The squared shifts sum to `amplitude^2` whatever `V` is.
pub fn harmonic_jumps(amplitude: f64, n_altered: usize) -> Vec<f64> {
    let h = harmonic(n_altered);
    (1..=n_altered).map(|n| amplitude / (n as f64 * h).sqrt()).collect()
}

/// I.i.d. standard normal panel.
pub fn noise_panel(n_sequences: usize, length: usize, seed: u64) -> DataPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n_sequences * length).map(|_| rng.sample(StandardNormal)).collect();
    DataPanel::from_flat(n_sequences, length, values).expect("valid dimensions")
}

/// One change at `tau` affecting the first `n_altered` rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCPScenario {
    pub length: usize,
    pub n_sequences: usize,
    pub n_altered: usize,
    pub tau: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    0.8
}

impl SingleCPScenario {
    pub fn new(length: usize, n_sequences: usize, n_altered: usize, tau: usize) -> Self {
        SingleCPScenario { length, n_sequences, n_altered, tau, amplitude: default_amplitude() }
    }

    fn validate(&self) -> Result<()> {
        if self.n_altered > self.n_sequences || self.tau == 0 || self.tau >= self.length {
            return Err(Error::Config(format!("invalid single change-point scenario {self:?}")));
        }
        Ok(())
    }
}

pub fn gen_single_cp(sc: &SingleCPScenario, seed: u64) -> Result<DataPanel> {
    sc.validate()?;
    let jumps = harmonic_jumps(sc.amplitude, sc.n_altered);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(sc.n_sequences * sc.length);
    for n in 0..sc.n_sequences {
        let shift = jumps.get(n).copied().unwrap_or(0.0);
        for t in 0..sc.length {
            let mean = if t >= sc.tau { shift } else { 0.0 };
            values.push(mean + rng.sample::<f64, _>(StandardNormal));
        }
    }
    DataPanel::from_flat(sc.n_sequences, sc.length, values)
}

/// Several changes, each shifting `n_altered` rows; the altered block moves
/// down by `offset` rows at every change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiCPScenario {
    pub length: usize,
    pub n_sequences: usize,
    pub taus: Vec<usize>,
    pub offset: usize,
    pub amplitude: f64,
    pub n_altered: usize,
}

impl MultiCPScenario {
    /// Three changes at 500, 1000, 1500 in 200 sequences of length 2000,
    /// 40 altered rows per change.
    pub fn standard(amplitude: f64, offset: usize) -> Self {
        MultiCPScenario {
            length: 2000,
            n_sequences: 200,
            taus: vec![500, 1000, 1500],
            offset,
            amplitude,
            n_altered: 40,
        }
    }

    fn validate(&self) -> Result<()> {
        let ordered = self.taus.windows(2).all(|w| w[0] < w[1]);
        let inside = self.taus.iter().all(|&t| t > 0 && t < self.length);
        let rows_fit = self.offset * self.taus.len().saturating_sub(1) + self.n_altered <= self.n_sequences;
        if !(ordered && inside && rows_fit) {
            return Err(Error::Config(format!("invalid multiple change-point scenario {self:?}")));
        }
        Ok(())
    }
}

/// Panel with cumulative mean shifts, plus the true change-point set.
pub fn gen_multi_cp(sc: &MultiCPScenario, seed: u64) -> Result<(DataPanel, Vec<usize>)> {
    sc.validate()?;
    let jumps = harmonic_jumps(sc.amplitude, sc.n_altered);
    let mut means = vec![0.0; sc.n_sequences * sc.length];
    for (j, &tau) in sc.taus.iter().enumerate() {
        for (m, &jump) in jumps.iter().enumerate() {
            let row = sc.offset * j + m;
            for mean in &mut means[row * sc.length + tau..(row + 1) * sc.length] {
                *mean += jump;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = means.into_iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)).collect();
    Ok((DataPanel::from_flat(sc.n_sequences, sc.length, values)?, sc.taus.clone()))
}

/// Poisson counts at rate `baseline`, switching to `ratio * baseline` after
/// `tau` in the first `n_altered` rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonScenario {
    pub length: usize,
    pub n_sequences: usize,
    pub n_altered: usize,
    pub baseline: f64,
    pub ratio: f64,
    pub tau: usize,
}

impl PoissonScenario {
    fn validate(&self) -> Result<()> {
        let ok = self.n_altered <= self.n_sequences
            && self.baseline > 0.0
            && self.ratio >= 1.0
            && self.tau > 0
            && self.tau < self.length;
        if !ok {
            return Err(Error::Config(format!("invalid Poisson scenario {self:?}")));
        }
        Ok(())
    }
}

pub fn gen_poisson(sc: &PoissonScenario, seed: u64) -> Result<(DataPanel, Vec<usize>)> {
    sc.validate()?;
    let base = Poisson::new(sc.baseline).map_err(|e| Error::Config(e.to_string()))?;
    let raised = Poisson::new(sc.ratio * sc.baseline).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(sc.n_sequences * sc.length);
    for n in 0..sc.n_sequences {
        for t in 0..sc.length {
            let dist = if n < sc.n_altered && t >= sc.tau { &raised } else { &base };
            values.push(dist.sample(&mut rng));
        }
    }
    let truth = if sc.ratio > 1.0 && sc.n_altered > 0 { vec![sc.tau] } else { Vec::new() };
    Ok((DataPanel::from_flat(sc.n_sequences, sc.length, values)?, truth))
}

/// I.i.d. Poisson panel at a common rate.
pub fn poisson_noise_panel(n_sequences: usize, length: usize, rate: f64, seed: u64) -> DataPanel {
    let dist = Poisson::new(rate).expect("positive rate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n_sequences * length).map(|_| dist.sample(&mut rng)).collect();
    DataPanel::from_flat(n_sequences, length, values).expect("valid dimensions")
}

/// Segment lengths of the partition of `1..=length` cut after each location.
fn segment_lengths(cps: &[usize], length: usize) -> Vec<usize> {
    let mut bounds: Vec<usize> = cps.iter().copied().filter(|&c| c > 0 && c < length).collect();
    bounds.sort_unstable();
    bounds.dedup();
    let mut prev = 0;
    let mut out = Vec::with_capacity(bounds.len() + 1);
    for b in bounds.into_iter().chain(std::iter::once(length)) {
        out.push(b - prev);
        prev = b;
    }
    out
}

fn pairs(n: f64) -> f64 {
    n * (n - 1.0) / 2.0
}

/// Hubert-Arabie adjusted Rand index between the segment partitions of
/// `1..=length` induced by two change-point sets.
pub fn ari(true_cps: &[usize], est_cps: &[usize], length: usize) -> f64 {
    let mut cuts_a: Vec<usize> = true_cps.iter().copied().filter(|&c| c > 0 && c < length).collect();
    let mut cuts_b: Vec<usize> = est_cps.iter().copied().filter(|&c| c > 0 && c < length).collect();
    cuts_a.sort_unstable();
    cuts_a.dedup();
    cuts_b.sort_unstable();
    cuts_b.dedup();
    if cuts_a == cuts_b {
        return 1.0;
    }
    // Contingency cells are the pieces of the common refinement.
    let mut all: Vec<usize> = cuts_a.iter().chain(&cuts_b).copied().collect();
    all.sort_unstable();
    all.dedup();
    let cells = segment_lengths(&all, length);
    let index: f64 = cells.iter().map(|&c| pairs(c as f64)).sum();
    let sum_a: f64 = segment_lengths(&cuts_a, length).iter().map(|&c| pairs(c as f64)).sum();
    let sum_b: f64 = segment_lengths(&cuts_b, length).iter().map(|&c| pairs(c as f64)).sum();
    let total = pairs(length as f64);
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        0.0
    } else {
        (index - expected) / denom
    }
}

/// `|est - truth| <= tolerance`.
pub fn hit_rate(est: usize, truth: usize, tolerance: usize) -> bool {
    est.abs_diff(truth) <= tolerance
}

/// Fraction of estimates within `tolerance` of `truth`.
pub fn hit_fraction(estimates: &[usize], truth: usize, tolerance: usize) -> f64 {
    if estimates.is_empty() {
        return 0.0;
    }
    estimates.iter().filter(|&&e| hit_rate(e, truth, tolerance)).count() as f64 / estimates.len() as f64
}
