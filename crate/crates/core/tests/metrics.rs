mod common;

use common::auroc_pairwise;
use parity_cal::calibrate::PlattParams;
use parity_cal::metrics::{
    binary_accuracy, binned_reliability, pce, qce, quantile_reliability, roc_auc, sharpness,
    DEFAULT_BINS,
};
use parity_cal::synthetic::sample_outcome;
use parity_cal::ForecastDistribution;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, coarse: bool) -> Vec<(f64, bool)> {
    (0..n)
        .map(|_| {
            let p: f64 = if coarse {
                // heavy ties
                rng.random_range(0..11) as f64 / 10.0
            } else {
                rng.random()
            };
            (p, rng.random::<f64>() < p)
        })
        .collect()
}

fn mean_outcome(pairs: &[(f64, bool)]) -> f64 {
    pairs.iter().filter(|(_, y)| *y).count() as f64 / pairs.len() as f64
}

#[test]
fn auroc_agrees_with_pairwise_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let pairs = random_pairs(&mut rng, 200, i % 2 == 0);
        let got = roc_auc(&pairs).unwrap();
        assert!((got - auroc_pairwise(&pairs)).abs() <= 1e-12, "set {i}");
    }
}

#[test]
fn auroc_degenerate_cases() {
    assert_eq!(roc_auc(&[(0.2, false), (0.8, true)]).unwrap(), 1.0);
    assert_eq!(roc_auc(&[(0.4, false), (0.4, true), (0.4, true)]).unwrap(), 0.5);
    assert!(roc_auc(&[(0.4, true), (0.6, true)]).is_err());
}

#[test]
fn threshold_outcomes_split_the_diagram() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pairs: Vec<(f64, bool)> = (0..30_000)
        .map(|_| {
            let p: f64 = rng.random();
            (p, p >= 0.5)
        })
        .collect();
    let d = binned_reliability(&pairs, DEFAULT_BINS).unwrap();
    for (m, b) in d.bins.iter().enumerate() {
        let obs = b.obs_avg.unwrap();
        if m < 15 {
            assert_eq!(obs, 0.0, "bin {m}");
        } else {
            assert_eq!(obs, 1.0, "bin {m}");
        }
    }
    assert_eq!(binary_accuracy(&pairs).unwrap(), 1.0);
}

#[test]
fn single_bin_metrics() {
    let pairs = vec![(0.999, true); 40];
    let d = binned_reliability(&pairs, 30).unwrap();
    let nonempty: Vec<_> = d.bins.iter().enumerate().filter(|(_, b)| b.count > 0).collect();
    assert_eq!(nonempty.len(), 1);
    assert_eq!(nonempty[0].0, 29);
    assert!((nonempty[0].1.pred_avg.unwrap() - 0.999).abs() < 1e-15);
    assert!((pce(&d) - 0.001).abs() < 1e-12);
}

#[test]
fn calibrated_constant_has_vanishing_pce() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for &t in &[1_000usize, 10_000, 100_000] {
        let pairs: Vec<(f64, bool)> = (0..t).map(|_| (0.3, rng.random::<f64>() < 0.3)).collect();
        let d = binned_reliability(&pairs, DEFAULT_BINS).unwrap();
        assert!(pce(&d) <= 2.0 / (t as f64).sqrt(), "T = {t}: {}", pce(&d));
        // predicting the empirical mean is exact
        let ybar = mean_outcome(&pairs);
        let exact: Vec<(f64, bool)> = pairs.iter().map(|&(_, y)| (ybar, y)).collect();
        assert!(pce(&binned_reliability(&exact, DEFAULT_BINS).unwrap()) < 1e-12);
    }
}

#[test]
fn quantile_coverage_of_self_sampled_outcomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let forecasts: Vec<ForecastDistribution> = (0..10_000)
        .map(|i| match i % 3 {
            0 => ForecastDistribution::gaussian(rng.random_range(-5.0..5.0), rng.random_range(0.5..3.0)).unwrap(),
            1 => ForecastDistribution::quantiles(
                vec![0.025, 0.1, 0.25, 0.5, 0.75, 0.9, 0.975],
                vec![-3.0, -1.5, -0.5, 0.0, 1.0, 2.5, 6.0],
            )
            .unwrap(),
            _ => parity_cal::synthetic::mixture_forecaster(),
        })
        .collect();
    let outcomes: Vec<f64> = forecasts
        .iter()
        .map(|f| sample_outcome(f, &mut rng).unwrap())
        .collect();
    let d = quantile_reliability(&forecasts, &outcomes, 100).unwrap();
    assert_eq!(d.bins[0].obs_avg, Some(0.0));
    for b in &d.bins[1..99] {
        assert!((b.obs_avg.unwrap() - b.pred_avg.unwrap()).abs() <= 0.02, "{b:?}");
    }
    assert!(qce(&d) <= 0.02);
}

fn arb_pairs() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec((0.0..=1.0f64, any::<bool>()), 1..400)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sharpness_is_bracketed(pairs in arb_pairs(), bins in 1usize..60) {
        let d = binned_reliability(&pairs, bins).unwrap();
        let ybar = mean_outcome(&pairs);
        let s = sharpness(&d);
        prop_assert!(s >= ybar * ybar - 1e-12 && s <= ybar + 1e-12, "{} not in [{}, {}]", s, ybar * ybar, ybar);
    }

    #[test]
    fn bin_counts_cover_every_record(pairs in arb_pairs(), bins in 1usize..60) {
        let d = binned_reliability(&pairs, bins).unwrap();
        prop_assert_eq!(d.bins.iter().map(|b| b.count).sum::<usize>(), d.total);
        prop_assert_eq!(d.total, pairs.len());
        prop_assert_eq!(d.bins.len(), bins);
    }

    #[test]
    fn auroc_ignores_increasing_maps(pairs in arb_pairs(), a in 0.05..3.0f64, b in -3.0..3.0f64) {
        let n_pos = pairs.iter().filter(|p| p.1).count();
        prop_assume!(n_pos > 0 && n_pos < pairs.len());
        // keep away from the logit clamp, where distinct inputs can merge
        let pairs: Vec<(f64, bool)> = pairs.iter().map(|&(p, y)| (0.01 + 0.98 * p, y)).collect();
        let m = PlattParams::new(a, b);
        let mapped: Vec<(f64, bool)> = pairs.iter().map(|&(p, y)| (m.apply(p), y)).collect();
        let (x, z) = (roc_auc(&pairs).unwrap(), roc_auc(&mapped).unwrap());
        prop_assert!((x - z).abs() <= 1e-9, "{} vs {}", x, z);
    }

    #[test]
    fn record_order_does_not_matter(pairs in arb_pairs(), seed in any::<u64>()) {
        let mut shuffled = pairs.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let (d1, d2) = (binned_reliability(&pairs, 30).unwrap(), binned_reliability(&shuffled, 30).unwrap());
        prop_assert!((pce(&d1) - pce(&d2)).abs() <= 1e-12);
        prop_assert!((sharpness(&d1) - sharpness(&d2)).abs() <= 1e-12);
        prop_assert_eq!(binary_accuracy(&pairs).unwrap(), binary_accuracy(&shuffled).unwrap());
        if let Ok(x) = roc_auc(&pairs) {
            prop_assert!((x - roc_auc(&shuffled).unwrap()).abs() <= 1e-12);
        }
    }
}
