//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run a subset by number: `cargo test -p dpl-core --test acceptance -- 4 9`.

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use rand::Rng;

use dpl_core::asymptotics::gupta_sandwich_grid;
use dpl_core::counting::{distinct_compositions_count, distinct_partitions_count, partitions_count, set_partitions_count, surjections_count};
use dpl_core::moments::{binomial_pmf_row, chung_erdos_lower_bound_exact, composition_moments_exact, surjection_moments_exact};
use dpl_core::numeric::factorial;
use dpl_core::oracle::{brute_count, brute_surjection_counts, chi_square_sampler, for_each_partition, object_count};
use dpl_core::threshold::{fit_exponent, ThresholdConfig};
use dpl_core::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn merge(parts: Vec<(bool, String)>) -> Outcome {
    let passed = parts.iter().all(|(ok, _)| *ok);
    let detail = parts
        .into_iter()
        .map(|(ok, d)| format!("{}{d}", if ok { "" } else { "[fail] " }))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(passed, detail)
}

fn c1_oracle_counts() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = 0;
    for n in 1..=10u64 {
        for k in 1..=n {
            for fam in CountFamily::ALL {
                let want = match fam {
                    CountFamily::Surjection => brute_surjection_counts(n, k).0,
                    CountFamily::DistinctFiberSurjection => brute_surjection_counts(n, k).1,
                    _ => brute_count(fam, n, k),
                };
                cases += 1;
                if fam.count(n, k) != BigUint::from(want) {
                    bad.push(format!("{fam}({n},{k})"));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{cases} counts, mismatches: {bad:?}"))
}

fn c2_identities() -> Outcome {
    let b = ExactBudget::unlimited();
    let mut bad = Vec::new();
    for n in 1..=60u64 {
        for k in 1..=n.min(10) {
            let kf = factorial(k);
            let q = distinct_partitions_count(n, k);
            if distinct_compositions_count(n, k) != &kf * &q {
                bad.push(format!("D=k!q ({n},{k})"));
            }
            if surjections_count(n, k) != &kf * set_partitions_count(n, k) {
                bad.push(format!("F=k!S ({n},{k})"));
            }
            let shifted = n.checked_sub(k * (k - 1) / 2).map(|m| partitions_count(m, k)).unwrap_or_default();
            if q != shifted {
                bad.push(format!("q shift ({n},{k})"));
            }
            let ps = prob_all_distinct_exact(Model::Surjection, n, k, b).unwrap();
            let pp = prob_all_distinct_exact(Model::SetPartition, n, k, b).unwrap();
            if ps != pp {
                bad.push(format!("P_surj=P_set ({n},{k})"));
            }
        }
    }
    outcome(bad.is_empty(), format!("n<=60, k<=10; failures: {bad:?}"))
}

fn c3_sandwich() -> Outcome {
    let grid = gupta_sandwich_grid(10_000, 20, ExactBudget::default()).expect("in budget");
    let unordered = grid.iter().filter(|s| !s.is_ordered()).count();
    let el = gupta_sandwich(1_000_000, 5, ExactBudget::default()).expect("in budget");
    merge(vec![
        (unordered == 0, format!("{} sandwiches, {unordered} out of order", grid.len())),
        (
            (1.0..=1.05).contains(&el.ratio_to_el),
            format!("EL ratio at (10^6,5) = {:.6}", el.ratio_to_el),
        ),
    ])
}

fn c4_first_moments() -> Outcome {
    let (n, k) = (100_000u64, 6u64);
    let c = composition_first_moment(n, k).unwrap() * 4.0 * n as f64 / (k as f64).powi(3);
    let (n, k) = (100_000u64, 4u64);
    let asym = (k * k) as f64 / 4.0 * (k as f64 / (2.0 * PI * n as f64)).sqrt();
    let s = surjection_first_moment(n, k).unwrap() / asym;
    merge(vec![
        ((0.9..=1.1).contains(&c), format!("composition (10^5,6) ratio {c:.4}")),
        ((0.8..=1.2).contains(&s), format!("surjection (10^5,4) ratio {s:.4}")),
    ])
}

fn c5_second_moments() -> Outcome {
    let (n, k) = (10_000f64, 5f64);
    let c = composition_pair_terms(10_000, 5).unwrap().two_two.unwrap() / (k.powi(6) / (16.0 * n * n));
    let (n, k) = (100_000f64, 4f64);
    let s = surjection_pair_terms(100_000, 4).unwrap().two_two.unwrap() / (k.powi(5) / (32.0 * PI * n));
    merge(vec![
        ((c - 1.0).abs() <= 0.15, format!("composition two_two (10^4,5) / k^6/(16n^2) = {c:.4}")),
        ((s - 1.0).abs() <= 0.20, format!("surjection two_two (10^5,4) / k^5/(32 pi n) = {s:.4}")),
    ])
}

fn c6_chung_erdos() -> Outcome {
    let b = ExactBudget::default();
    let one = Ratio::from_integer(BigUint::one());
    let mut bad = Vec::new();
    let mut cases = 0;
    for m in [Model::Composition, Model::Surjection] {
        for n in 2..=14u64 {
            for k in 2..=n.min(6) {
                let mo = match m {
                    Model::Composition => composition_moments_exact(n, k),
                    _ => surjection_moments_exact(n, k),
                }
                .unwrap();
                let bound = chung_erdos_lower_bound_exact(&mo.first, &mo.unordered_pair_sum());
                let union = &one - prob_all_distinct_exact(m, n, k, b).unwrap().as_ratio();
                cases += 1;
                if bound > union {
                    bad.push(format!("{m}({n},{k})"));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{cases} instances, violations: {bad:?}"))
}

fn c7_samplers() -> Outcome {
    const DRAWS: u64 = 100_000;
    let b = ExactBudget::default();
    let mut instances = 0;
    let mut chi_bad = Vec::new();
    let mut mc_bad = Vec::new();
    let mut min_p = 1.0f64;
    for (mi, m) in Model::ALL.into_iter().enumerate() {
        for n in 1..=60u64 {
            for k in 1..=n {
                if object_count(m, n, k) > BigUint::from(200u32) {
                    continue;
                }
                let stream = (mi as u64) << 32 | n << 16 | k;
                let chi = chi_square_sampler(m, n, k, DRAWS, RngSpec::new(7, stream)).unwrap();
                min_p = min_p.min(chi.p_value);
                if chi.p_value <= 0.001 {
                    chi_bad.push(format!("{m}({n},{k}) p={:.1e}", chi.p_value));
                }
                let est = estimate_p_distinct(m, n, k, DRAWS, RngSpec::new(8, stream), b).unwrap();
                let exact = prob_all_distinct_exact(m, n, k, b).unwrap().to_f64();
                let sigma = (exact * (1.0 - exact) / DRAWS as f64).sqrt();
                if (est.p_hat - exact).abs() > 4.0 * sigma {
                    mc_bad.push(format!("{m}({n},{k})"));
                }
                instances += 1;
            }
        }
    }
    merge(vec![
        (
            chi_bad.is_empty(),
            format!("{instances} instances, min chi-square p {min_p:.4}, failures {chi_bad:?}"),
        ),
        (mc_bad.is_empty(), format!("MC outside 4 sigma: {mc_bad:?}")),
    ])
}

fn c8_threshold_exponents() -> Outcome {
    let grid = [10_000u64, 100_000, 1_000_000, 10_000_000];
    let cfg = ThresholdConfig::default();
    let rng = RngSpec::new(20_240_601, 0);
    let fit = |m: Model| fit_exponent(m, &grid, &cfg, rng).expect("crossing found");
    let comp = fit(Model::Composition);
    let part = fit(Model::Partition);
    let surj = fit(Model::Surjection);
    let setp = fit(Model::SetPartition);
    let ci = |f: &ThresholdFit| f.slope_ci.expect("four points");
    let overlap = |a: (f64, f64), b: (f64, f64)| a.0 <= b.1 && b.0 <= a.1;
    let pts = |f: &ThresholdFit| format!("{:?}", f.points);
    merge(vec![
        (
            (0.28..=0.38).contains(&comp.slope),
            format!("composition slope {:.4} ci {:.4?} k_c {}", comp.slope, ci(&comp), pts(&comp)),
        ),
        (
            (0.15..=0.25).contains(&surj.slope),
            format!("surjection slope {:.4} ci {:.4?} k_c {}", surj.slope, ci(&surj), pts(&surj)),
        ),
        (
            overlap(ci(&part), ci(&comp)),
            format!("partition slope {:.4} ci {:.4?} k_c {}", part.slope, ci(&part), pts(&part)),
        ),
        (
            setp.slope == surj.slope,
            format!("set_partition slope {:.4} (equal to surjection)", setp.slope),
        ),
    ])
}

fn c9_claim1() -> Outcome {
    let mut parts = Vec::new();
    for k in [4u64, 10, 50] {
        let row = binomial_pmf_row(10_000, 2.0 / k as f64);
        let r = claim1_ratio(&row, 2).unwrap();
        parts.push(((r - 0.5).abs() <= 0.01, format!("k={k}: {r:.6}")));
    }
    merge(parts)
}

fn c10_entropy() -> Outcome {
    let mut rng = RngSpec::new(99, 0).rng();
    let mut negative = 0;
    for _ in 0..10_000 {
        let k = rng.random_range(1..=30usize);
        let hi = rng.random_range(1..=40u64);
        let sizes: Vec<u64> = (0..k).map(|_| rng.random_range(1..=hi)).collect();
        if dpi_gap(&ClusterProfile::new(sizes).unwrap()) < 0.0 {
            negative += 1;
        }
    }
    let mut mismatched = 0;
    let mut profiles = 0;
    for n in 1..=10u64 {
        for k in 1..=n {
            for_each_partition(n, k, |sizes| {
                let p = ClusterProfile::new(sizes.to_vec()).unwrap();
                let gap = dpi_gap(&p);
                profiles += 1;
                if gap < 0.0 || (gap == 0.0) != has_distinct_parts(sizes) {
                    mismatched += 1;
                }
            });
        }
    }
    merge(vec![
        (negative == 0, format!("10^4 random profiles, {negative} negative gaps")),
        (mismatched == 0, format!("{profiles} exhaustive profiles, {mismatched} bridge mismatches")),
    ])
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "oracle equivalence of exact counts", c1_oracle_counts),
        (2, "counting identities", c2_identities),
        (3, "Gupta sandwich and Erdős–Lehner ratio", c3_sandwich),
        (4, "first-moment constants", c4_first_moments),
        (5, "second-moment main terms", c5_second_moments),
        (6, "Chung–Erdős consistency", c6_chung_erdos),
        (7, "sampler correctness", c7_samplers),
        (8, "threshold exponents", c8_threshold_exponents),
        (9, "divisor-class ratio on binomial rows", c9_claim1),
        (10, "entropy bridge", c10_entropy),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id:>2} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += (!o.passed) as u32;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
