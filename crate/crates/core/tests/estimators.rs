mod common;

use berbench::estimators::ghp::{euclidean_mst, fr_cross_count, ghp_estimate, hp_divergence};
use berbench::estimators::kde::{
    adaptive_kde_fit, clakde_estimate, clakde_scores, gaussian_kde_logpdf, gkde_estimate, gkde_estimates, GkdeBandwidth,
};
use berbench::estimators::knn::{default_k_range, knn_estimate, knn_loo_error};
use berbench::estimators::{naive_bayes_error, run_estimators, EstimatorSet};
use berbench::harness::{derive_stream, Purpose};
use berbench::{build_scenario, Family, Label, LabeledDataset, ScenarioParams};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn knn_matches_brute_force_on_small_set() {
    let ds = random_dataset(&mut rng(1), 6, 6, 2, 0.5);
    assert_eq!(knn_loo_error(&ds, 3).unwrap(), brute_knn_loo_error(&ds, 3));
}

#[test]
fn knn_estimate_matches_exhaustive_scan() {
    let ds = random_dataset(&mut rng(2), 10, 10, 3, 0.7);
    let est = knn_estimate(&ds, &default_k_range()).unwrap();
    let mut best = (f64::INFINITY, 0);
    for k in (1..=19).step_by(2) {
        let e = brute_knn_loo_error(&ds, k);
        if e < best.0 {
            best = (e, k);
        }
    }
    assert_eq!((est.upper, est.k0), best);
}

#[test]
fn mst_total_weight_matches_kruskal() {
    let mut r = rng(3);
    let pts: Vec<f64> = (0..30).map(|_| r.gen_range(-1.0..1.0)).collect();
    let edges = euclidean_mst(&pts, 3).unwrap();
    let (tree, total) = kruskal_mst(&pts, 3);
    let got: f64 = edges.iter().map(|e| e.weight).sum();
    assert!(rel_close(got, total, 1e-12));
    let mut pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.a, e.b)).collect();
    pairs.sort();
    assert_eq!(pairs, tree);
}

#[test]
fn cross_count_matches_oracle_with_random_labels() {
    let mut r = rng(4);
    let pts: Vec<f64> = (0..24).map(|_| r.gen_range(-1.0..1.0)).collect();
    let mut labels: Vec<Label> = (0..12).map(|i| if i < 6 { Label::A } else { Label::B }).collect();
    labels.shuffle(&mut r);
    let ds = LabeledDataset::new(2, pts, labels).unwrap();
    assert_eq!(fr_cross_count(&ds).unwrap(), brute_cross_count(&ds));
}

#[test]
fn divergence_near_zero_for_identical_distributions() {
    let mut total = 0.0;
    for t in 0..200 {
        let mut r = rng(1000 + t);
        let mut draw = || (0..500).map(|_| vec![r.sample(StandardNormal), r.sample(StandardNormal)]).collect::<Vec<Vec<f64>>>();
        let (a, b) = (draw(), draw());
        total += hp_divergence(&LabeledDataset::from_classes(2, &a, &b).unwrap()).unwrap();
    }
    assert!(total / 200.0 < 0.05, "mean divergence {}", total / 200.0);
}

#[test]
fn gkde_matches_linear_transcription() {
    let ds = random_dataset(&mut rng(5), 10, 10, 2, 0.8);
    assert!(rel_close(gkde_estimate(&ds, 0.25).unwrap(), linear_gkde(&ds, 0.25), 1e-9));
}

#[test]
fn gkde_batch_matches_single_calls() {
    let ds = random_dataset(&mut rng(6), 15, 12, 3, 0.4);
    let hs = [0.05, 0.3, 2.0];
    let bws: Vec<GkdeBandwidth> = hs.iter().map(|&h| GkdeBandwidth::Fixed(h)).collect();
    let many = gkde_estimates(&ds, &bws).unwrap();
    for (h, v) in hs.iter().zip(many) {
        assert_eq!(v, gkde_estimate(&ds, *h).unwrap());
    }
}

#[test]
fn naive_bayes_matches_hand_oracle() {
    let ds = random_dataset(&mut rng(7), 10, 10, 3, 0.6);
    assert_eq!(naive_bayes_error(&ds).unwrap(), hand_naive_bayes(&ds));
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn adaptive_kde_beats_bad_fixed_bandwidths_on_grid_error() {
    let mut r = rng(8);
    let pts: Vec<f64> = (0..500).map(|_| r.sample(StandardNormal)).collect();
    let model = adaptive_kde_fit(&pts, 1).unwrap();
    let grid: Vec<f64> = (0..=400).map(|i| -4.0 + 8.0 * i as f64 / 400.0).collect();
    let ise = |f: &dyn Fn(f64) -> f64| grid.iter().map(|&x| (f(x) - normal_pdf(x)).powi(2)).sum::<f64>() * 0.02;
    let adaptive = ise(&|x| model.log_pdf(&[x], None).unwrap().exp());
    for h in [0.01, 5.0] {
        let fixed = ise(&|x| gaussian_kde_logpdf(&[x], &pts, h).unwrap().exp());
        assert!(adaptive < fixed, "adaptive {adaptive} vs h={h} {fixed}");
    }
}

#[test]
fn clakde_on_identical_distributions_is_near_half() {
    let spec = build_scenario(ScenarioParams::new(Family::GvG, 2, 0.0), &mut rng(9)).unwrap();
    let mut inside = 0;
    for t in 0..100 {
        let ds = spec.sample_dataset(1000, &mut derive_stream(77, t, Purpose::Data));
        let v = clakde_estimate(&ds).unwrap();
        if (0.4..=0.5).contains(&v) {
            inside += 1;
        }
    }
    assert!(inside >= 90, "{inside} of 100 in [0.4, 0.5]");
}

#[test]
fn clakde_gvg_quarter_ber_within_envelope() {
    // Φ(−μ/(2σ)) = 0.25 with σ² = 0.3
    let mu = 2.0 * 0.3f64.sqrt() * 0.674_489_750_196_081_7;
    let spec = build_scenario(ScenarioParams::new(Family::GvG, 2, mu), &mut rng(10)).unwrap();
    let mean = (0..5)
        .map(|t| clakde_estimate(&spec.sample_dataset(2500, &mut derive_stream(5, t, Purpose::Data))).unwrap())
        .sum::<f64>()
        / 5.0;
    assert!((0.15..=0.35).contains(&mean), "mean CLAKDE {mean}");
}

#[test]
fn all_estimators_finite_at_large_scale() {
    let spec = build_scenario(ScenarioParams::new(Family::TvT, 30, 3.0), &mut rng(11)).unwrap();
    let ds = spec.sample_dataset(2500, &mut rng(12));
    let out = run_estimators(&ds, &EstimatorSet::all(), None).unwrap();
    assert_eq!(out.estimates.len(), 15);
    assert!(out.estimates.values().all(|v| v.is_finite()));
}

fn dataset_strategy() -> impl Strategy<Value = LabeledDataset> {
    (1usize..=4, 2usize..=12, 2usize..=12, any::<u64>(), 0.0f64..3.0)
        .prop_map(|(d, na, nb, seed, shift)| random_dataset(&mut rng(seed), na.max(d + 1).max(4), nb.max(d + 1).max(4), d, shift))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knn_bounds_ordered_and_in_range(ds in dataset_strategy()) {
        let e = knn_estimate(&ds, &default_k_range()).unwrap();
        prop_assert!(0.0 <= e.lower && e.lower <= e.mid && e.mid <= e.upper && e.upper <= 1.0);
    }

    #[test]
    fn knn_ignores_presentation_order(ds in dataset_strategy(), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..ds.len()).collect();
        order.shuffle(&mut rng(seed));
        let shuffled = ds.permuted(&order);
        prop_assert_eq!(knn_estimate(&ds, &default_k_range()).unwrap(), knn_estimate(&shuffled, &default_k_range()).unwrap());
    }

    #[test]
    fn knn_same_ranks_under_plain_euclidean(ds in dataset_strategy()) {
        // the oracle sorts squared distances; sqrt is monotone so ranks agree
        prop_assert_eq!(knn_loo_error(&ds, 1).unwrap(), brute_knn_loo_error(&ds, 1));
    }

    #[test]
    fn ghp_bounds_ordered(ds in dataset_strategy()) {
        let g = ghp_estimate(&ds).unwrap();
        prop_assert!(0.0 <= g.lower && g.lower <= g.mid && g.mid <= g.upper && g.upper <= 0.5);
        prop_assert_eq!(g, ghp_estimate(&ds).unwrap());
    }

    #[test]
    fn ghp_invariant_to_rigid_motion_and_scale(ds in dataset_strategy(), angle in 0.0f64..std::f64::consts::TAU, scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let (s, c) = angle.sin_cos();
        let d = ds.dim();
        let moved = LabeledDataset::new(
            d,
            (0..ds.len())
                .flat_map(|i| {
                    let x = ds.row(i);
                    let mut y = x.to_vec();
                    if d >= 2 {
                        y[0] = c * x[0] - s * x[1];
                        y[1] = s * x[0] + c * x[1];
                    }
                    y.into_iter().map(|v| v * scale + shift).collect::<Vec<_>>()
                })
                .collect(),
            ds.labels().to_vec(),
        )
        .unwrap();
        prop_assert_eq!(fr_cross_count(&ds).unwrap(), fr_cross_count(&moved).unwrap());
    }

    #[test]
    fn clakde_symmetric_and_in_range(ds in dataset_strategy()) {
        let s = clakde_scores(&ds).unwrap();
        prop_assert!((0.0..=0.5).contains(&s.ber_hat));
        prop_assert_eq!(s.ber_hat, s.j_value / 2.0);
        prop_assert_eq!(s.ber_hat, clakde_estimate(&ds.swap_labels()).unwrap());
    }

    #[test]
    fn suite_outputs_finite(ds in dataset_strategy()) {
        let out = run_estimators(&ds, &EstimatorSet::all(), None).unwrap();
        prop_assert!(out.estimates.values().all(|v| v.is_finite()));
        prop_assert!((0.0..=0.5).contains(&out.estimates["gc"]));
    }
}
