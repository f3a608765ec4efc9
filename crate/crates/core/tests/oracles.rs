//! Closed forms and DPs against exhaustive enumeration on small instances.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;

use dpl_core::counting::CountFamily;
use dpl_core::moments::{chung_erdos_lower_bound_exact, composition_moments_exact, surjection_moments_exact};
use dpl_core::oracle::{brute_count, brute_moments, brute_prob_all_distinct, brute_surjection_counts};
use dpl_core::{prob_all_distinct_exact, ExactBudget, Model};

#[test]
fn counts_match_enumeration_up_to_ten() {
    for n in 0..=10u64 {
        for k in 0..=n {
            for fam in CountFamily::ALL {
                let want = match fam {
                    CountFamily::Surjection => brute_surjection_counts(n, k).0,
                    CountFamily::DistinctFiberSurjection => brute_surjection_counts(n, k).1,
                    _ => brute_count(fam, n, k),
                };
                assert_eq!(fam.count(n, k), BigUint::from(want), "{fam} ({n},{k})");
            }
        }
    }
}

#[test]
fn probabilities_match_enumeration() {
    for n in 1..=10u64 {
        for k in 1..=n {
            for m in Model::ALL {
                let got = prob_all_distinct_exact(m, n, k, ExactBudget::default()).unwrap();
                assert_eq!(got.as_ratio(), &brute_prob_all_distinct(m, n, k), "{m} ({n},{k})");
            }
        }
    }
}

#[test]
fn composition_first_moment_matches_enumeration() {
    for n in 2..=14u64 {
        for k in 2..=n.min(6) {
            let got = composition_moments_exact(n, k).unwrap();
            assert_eq!(got.first, brute_moments(Model::Composition, n, k).first, "({n},{k})");
        }
    }
}

#[test]
fn surjection_first_moment_matches_enumeration() {
    for n in 2..=12u64 {
        for k in 2..=n.min(5) {
            let got = surjection_moments_exact(n, k).unwrap();
            assert_eq!(got.first, brute_moments(Model::Surjection, n, k).first, "({n},{k})");
        }
    }
}

#[test]
fn pair_terms_match_grouped_enumeration() {
    assert_eq!(composition_moments_exact(20, 5).unwrap(), brute_moments(Model::Composition, 20, 5));
    assert_eq!(surjection_moments_exact(12, 5).unwrap(), brute_moments(Model::Surjection, 12, 5));
    for n in 4..=12u64 {
        for k in 2..=n.min(6) {
            assert_eq!(
                composition_moments_exact(n, k).unwrap(),
                brute_moments(Model::Composition, n, k),
                "composition ({n},{k})"
            );
            assert_eq!(
                surjection_moments_exact(n, k).unwrap(),
                brute_moments(Model::Surjection, n, k),
                "surjection ({n},{k})"
            );
        }
    }
}

#[test]
fn two_two_without_equal_values_matches_enumeration() {
    let m = composition_moments_exact(20, 5).unwrap();
    let b = brute_moments(Model::Composition, 20, 5);
    let distinct = m.two_two.clone().unwrap() - m.four_equal.clone().unwrap();
    assert_eq!(distinct, b.two_two.unwrap() - b.four_equal.unwrap());
    assert!(distinct < m.two_two.unwrap());
}

#[test]
fn chung_erdos_never_exceeds_union_probability() {
    let one = Ratio::from_integer(BigUint::one());
    for n in 2..=14u64 {
        for k in 2..=n.min(6) {
            for m in [Model::Composition, Model::Surjection] {
                let mo = match m {
                    Model::Composition => composition_moments_exact(n, k),
                    _ => surjection_moments_exact(n, k),
                }
                .unwrap();
                let bound = chung_erdos_lower_bound_exact(&mo.first, &mo.unordered_pair_sum());
                let p = prob_all_distinct_exact(m, n, k, ExactBudget::default()).unwrap();
                assert!(bound <= &one - p.as_ratio(), "{m} ({n},{k})");
            }
        }
    }
}
