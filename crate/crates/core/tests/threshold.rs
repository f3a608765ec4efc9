use dpl_core::probability::prob_all_distinct_log;
use dpl_core::threshold::{estimate_p_distinct, find_kc, max_distinct_k, ThresholdConfig};
use dpl_core::{prob_all_distinct, ExactBudget, Model, RngSpec};

/// Smallest k >= 2 with exact P(some equal) >= target.
fn exact_crossing(model: Model, n: u64, target: f64) -> u64 {
    (2..=max_distinct_k(n))
        .find(|&k| 1.0 - prob_all_distinct_log(model, n, k).unwrap().value() >= target)
        .expect("crossing exists")
}

#[test]
fn surjection_crossing_matches_log_space_probability() {
    let n = 3000;
    let exact = exact_crossing(Model::Surjection, n, 0.5);
    let r = find_kc(Model::Surjection, n, &ThresholdConfig::default(), RngSpec::new(17, 0)).unwrap();
    assert!(r.k_c.abs_diff(exact) <= 1, "mc {} exact {exact}", r.k_c);
}

#[test]
fn composition_crossing_matches_exact_probability() {
    let n = 50_000;
    let exact = exact_crossing(Model::Composition, n, 0.5);
    let r = find_kc(Model::Composition, n, &ThresholdConfig::default(), RngSpec::new(18, 0)).unwrap();
    assert!(r.k_c.abs_diff(exact) <= 1, "mc {} exact {exact}", r.k_c);
    assert!(r.ambiguous || (r.p_at >= 0.5 && r.p_below < 0.5));
}

#[test]
fn set_partition_crossing_equals_surjection() {
    let cfg = ThresholdConfig::default();
    let a = find_kc(Model::Surjection, 20_000, &cfg, RngSpec::new(3, 1)).unwrap();
    let b = find_kc(Model::SetPartition, 20_000, &cfg, RngSpec::new(3, 1)).unwrap();
    assert_eq!((a.k_c, a.p_at, a.p_below), (b.k_c, b.p_at, b.p_below));
}

#[test]
fn estimates_within_four_sigma_of_exact() {
    let b = ExactBudget::default();
    let mut stream = 0;
    for m in Model::ALL {
        for &(n, k) in &[(12u64, 3u64), (30, 4), (60, 5), (100, 6), (200, 8), (40, 2)] {
            stream += 1;
            let est = estimate_p_distinct(m, n, k, 50_000, RngSpec::new(31, stream), b).unwrap();
            let exact = prob_all_distinct(m, n, k, b).unwrap().value;
            let sigma = (exact * (1.0 - exact) / 50_000.0).sqrt();
            assert!((est.p_hat - exact).abs() <= 4.0 * sigma, "{m} ({n},{k}): {} vs {exact}", est.p_hat);
        }
    }
}
