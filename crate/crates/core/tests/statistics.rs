//! Monte-Carlo properties of p-values, detection and the Poisson model.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use slseg::models::{DataPanel, SegmentTriple};
use slseg::rng::derive_seed;
use slseg::segment::{sl_detect, sl_estimate};
use slseg::simulate::{gen_poisson, noise_panel, PoissonScenario};
use slseg::theory::poisson_info;
use slseg::{Model, SlConfig};

fn unnormalized(model: Model, length: usize) -> SlConfig {
    let mut cfg = SlConfig::for_length(model, length);
    cfg.normalize = false;
    cfg
}

#[test]
fn normal_pvalues_uniform_under_null() {
    let draws = 100_000u64;
    let pvals: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(17, i));
            let left = rng.random_range(1..=30usize);
            let right = rng.random_range(1..=30usize);
            let mean = rng.random_range(-3.0..3.0);
            let base = noise_panel(1, left + right, rng.random());
            let shifted = DataPanel::from_rows(vec![base.row(0).iter().map(|x| x + mean).collect()]).unwrap();
            shifted.normal_pvalue(0, SegmentTriple::new(0, left, left + right)).unwrap().1
        })
        .collect();
    let ks = common::ks_uniform(pvals);
    assert!(ks < common::ks_critical_1pct(draws as usize), "KS = {ks}");
}

#[test]
fn estimate_silent_on_null_at_c10() {
    let cfg = unnormalized(Model::Normal, 200);
    let silent = (0..200u64)
        .filter(|&seed| {
            let panel = noise_panel(20, 200, seed);
            sl_estimate(&panel, 10.0, 1, 1, 200, &cfg).unwrap().is_none()
        })
        .count();
    assert!(silent >= 198, "{silent}/200 silent");
}

#[test]
fn estimate_locates_strong_change() {
    let cfg = unnormalized(Model::Normal, 200);
    let hits = (0..200u64)
        .filter(|&seed| {
            let noise = noise_panel(20, 200, 1_000 + seed);
            let rows = noise
                .rows()
                .map(|row| row.iter().enumerate().map(|(t, x)| if t >= 100 { x + 2.0 } else { *x }).collect())
                .collect();
            let panel = DataPanel::from_rows(rows).unwrap();
            matches!(sl_estimate(&panel, 5.0, 1, 1, 200, &cfg).unwrap(), Some((tau, _)) if tau.abs_diff(100) <= 5)
        })
        .count();
    assert!(hits >= 190, "{hits}/200 within 5");
}

#[test]
fn too_short_segments_find_nothing() {
    let panel = noise_panel(5, 40, 1);
    let cfg = unnormalized(Model::Normal, 40);
    // h_1 + d_1 = 2 > g = 1
    assert_eq!(sl_estimate(&panel, -100.0, 1, 7, 7, &cfg).unwrap(), None);
    let single = noise_panel(20, 1, 2);
    let cfg = unnormalized(Model::Normal, 1);
    assert!(sl_detect(&single, -100.0, &cfg).unwrap().change_points.is_empty());
}

#[test]
fn detected_points_are_strictly_interior_and_sorted() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let len = rng.random_range(20..120usize);
        let panel = noise_panel(6, len, rng.random());
        let cfg = unnormalized(Model::Normal, len);
        let out = sl_detect(&panel, -2.0, &cfg).unwrap();
        let locs = out.locations();
        assert!(locs.windows(2).all(|w| w[0] < w[1]));
        assert!(locs.iter().all(|&t| t > 0 && t < len));
        for cp in &out.change_points {
            assert!(cp.score >= -2.0);
            assert!(cp.window.s < cp.location && cp.location < cp.window.u);
        }
    }
}

#[test]
fn poisson_strong_ratio_detected() {
    let sc = PoissonScenario { length: 200, n_sequences: 10, n_altered: 10, baseline: 5.0, ratio: 2.0, tau: 100 };
    let cfg = SlConfig::for_length(Model::Poisson, 200);
    let detected = (0..100u64)
        .filter(|&seed| {
            let (panel, _) = gen_poisson(&sc, seed).unwrap();
            let cfg = cfg.clone().with_seed(seed);
            sl_detect(&panel, 5.0, &cfg).unwrap().locations().iter().any(|&t| t.abs_diff(100) <= 10)
        })
        .count();
    assert!(detected >= 95, "{detected}/100");
}

#[test]
fn poisson_ratio_one_is_null() {
    let sc = PoissonScenario { length: 200, n_sequences: 10, n_altered: 10, baseline: 5.0, ratio: 1.0, tau: 100 };
    let cfg = SlConfig::for_length(Model::Poisson, 200);
    let false_alarms = (0..100u64)
        .filter(|&seed| {
            let (panel, truth) = gen_poisson(&sc, seed).unwrap();
            assert!(truth.is_empty());
            !sl_detect(&panel, 5.0, &cfg.clone().with_seed(seed)).unwrap().change_points.is_empty()
        })
        .count();
    assert!(false_alarms <= 10, "{false_alarms}/100");
}

#[test]
fn poisson_window_information_matches_large_deviation_constant() {
    // E log LR of (mu0, r mu0) against the pooled rate over h + h counts.
    let (mu0, r, h) = (3.0, 2.5, 40usize);
    let pooled = 0.5 * (1.0 + r) * mu0;
    let log_lik = |x: f64, rate: f64| x * rate.ln() - rate;
    let pre = Poisson::new(mu0).unwrap();
    let post = Poisson::new(r * mu0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let reps = 20_000;
    let mut total = 0.0;
    for _ in 0..reps {
        for _ in 0..h {
            let (x, y): (f64, f64) = (pre.sample(&mut rng), post.sample(&mut rng));
            total += log_lik(x, mu0) - log_lik(x, pooled) + log_lik(y, r * mu0) - log_lik(y, pooled);
        }
    }
    let mc = total / reps as f64;
    let closed = h as f64 * mu0 * poisson_info(r).unwrap();
    assert!((mc - closed).abs() <= 0.05 * closed, "{mc} vs {closed}");
}

#[test]
fn estimate_matches_brute_force_on_more_panels() {
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for case in 0..60 {
        let model = if case % 3 == 0 { Model::Poisson } else { Model::Normal };
        let n = rng.random_range(4..=5usize);
        let len = rng.random_range(10..=60usize);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..len)
                    .map(|t| match model {
                        Model::Normal => rng.random_range(-16i32..16) as f64 / 8.0 + if t > len / 2 { 1.0 } else { 0.0 },
                        Model::Poisson => rng.random_range(0u32..6) as f64,
                    })
                    .collect()
            })
            .collect();
        let panel = DataPanel::from_rows(rows).unwrap();
        let cfg = unnormalized(model, len).with_seed(case);
        let params = cfg.score_params(n).unwrap();
        for critical in [-2.0, 2.0] {
            let lib = sl_estimate(&panel, critical, 1, 1, len, &cfg).unwrap();
            let naive = common::brute_force_estimate(&panel, model, case, &params, critical, 1, 1, len);
            assert_eq!(lib, naive, "case {case}, c = {critical}");
        }
    }
}
