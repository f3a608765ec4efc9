//! Small-instance self-check: every closed form and DP against the
//! brute-force enumerators, plus the exact identities and orderings.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use serde::Serialize;

use crate::asymptotics::{gupta_sandwich_grid, partition_threshold_transfer};
use crate::counting::{
    compositions_count, distinct_compositions_count, distinct_partitions_count, log_count,
    partitions_count, set_partitions_count, surjections_count, CountFamily, ExactBudget,
};
use crate::entropy::{dpi_gap, ClusterProfile};
use crate::moments::{
    chung_erdos_lower_bound_exact, claim1_ratio, binomial_pmf_row, composition_moments_exact,
    surjection_moments_exact, ExactMoments,
};
use crate::numeric::{factorial, ln_biguint};
use crate::oracle::{
    brute_count, brute_moments, brute_prob_all_distinct, brute_surjection_counts, chi_square_sampler,
    for_each_partition,
};
use crate::probability::{prob_all_distinct_exact, Model};
use crate::samplers::{has_distinct_parts, RngSpec};
use crate::threshold::estimate_p_distinct;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn counts_vs_enumeration() -> Outcome {
    let mut cases = 0;
    for n in 0..=10u64 {
        for k in 1..=n.max(1) {
            for fam in CountFamily::ALL {
                if matches!(fam, CountFamily::Surjection | CountFamily::DistinctFiberSurjection) {
                    continue;
                }
                let want = BigUint::from(brute_count(fam, n, k));
                ensure(fam.count(n, k) == want, || format!("{fam} ({n},{k})"))?;
                cases += 1;
            }
            let (f, fd) = brute_surjection_counts(n, k);
            ensure(surjections_count(n, k) == BigUint::from(f), || format!("surjection ({n},{k})"))?;
            ensure(
                CountFamily::DistinctFiberSurjection.count(n, k) == BigUint::from(fd),
                || format!("distinct_fiber_surjection ({n},{k})"),
            )?;
            cases += 2;
        }
    }
    Ok(format!("{cases} counts"))
}

fn identities() -> Outcome {
    let b = ExactBudget::unlimited();
    for n in 1..=60u64 {
        for k in 1..=n.min(10) {
            let kf = factorial(k);
            let q = distinct_partitions_count(n, k);
            ensure(distinct_compositions_count(n, k) == &kf * &q, || format!("D = k! q at ({n},{k})"))?;
            ensure(surjections_count(n, k) == &kf * set_partitions_count(n, k), || {
                format!("F = k! S at ({n},{k})")
            })?;
            let shifted = n
                .checked_sub(k * (k - 1) / 2)
                .map(|m| partitions_count(m, k))
                .unwrap_or_default();
            ensure(q == shifted, || format!("q(n,k) = p(n - C(k,2), k) at ({n},{k})"))?;
            let ps = prob_all_distinct_exact(Model::Surjection, n, k, b).map_err(|e| e.to_string())?;
            let pp = prob_all_distinct_exact(Model::SetPartition, n, k, b).map_err(|e| e.to_string())?;
            ensure(ps == pp, || format!("P_surjection = P_set_partition at ({n},{k})"))?;
        }
    }
    Ok("n <= 60, k <= 10".into())
}

fn log_vs_exact() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=60u64 {
        for k in 1..=n.min(10) {
            for fam in CountFamily::ALL {
                let exact = fam.count(n, k);
                let lg = log_count(fam, n, k);
                if exact == BigUint::default() {
                    ensure(lg.is_zero, || format!("{fam} ({n},{k}) should be zero"))?;
                    continue;
                }
                let err = (lg.log_value - ln_biguint(&exact)).abs();
                worst = worst.max(err);
                ensure(err < 1e-9, || format!("{fam} ({n},{k}): ln error {err:e}"))?;
            }
        }
    }
    Ok(format!("max ln error {worst:.2e}"))
}

fn probabilities_vs_enumeration() -> Outcome {
    let b = ExactBudget::default();
    for n in 1..=9u64 {
        for k in 1..=n {
            for m in Model::ALL {
                let got = prob_all_distinct_exact(m, n, k, b).map_err(|e| e.to_string())?;
                ensure(got.as_ratio() == &brute_prob_all_distinct(m, n, k), || format!("{m} ({n},{k})"))?;
            }
        }
    }
    Ok("n <= 9, all models".into())
}

fn first_moments_vs_enumeration() -> Outcome {
    for n in 2..=14u64 {
        for k in 2..=n.min(6) {
            let got = composition_moments_exact(n, k).map_err(|e| e.to_string())?;
            ensure(got.first == brute_moments(Model::Composition, n, k).first, || {
                format!("composition ({n},{k})")
            })?;
        }
    }
    for n in 2..=12u64 {
        for k in 2..=n.min(5) {
            let got = surjection_moments_exact(n, k).map_err(|e| e.to_string())?;
            ensure(got.first == brute_moments(Model::Surjection, n, k).first, || {
                format!("surjection ({n},{k})")
            })?;
        }
    }
    Ok("composition n <= 14, surjection n <= 12".into())
}

fn pair_terms_vs_enumeration() -> Outcome {
    let cases: [(Model, u64, u64); 6] = [
        (Model::Composition, 20, 5),
        (Model::Composition, 16, 6),
        (Model::Composition, 12, 4),
        (Model::Surjection, 12, 5),
        (Model::Surjection, 10, 6),
        (Model::Surjection, 9, 4),
    ];
    for (m, n, k) in cases {
        let got = match m {
            Model::Composition => composition_moments_exact(n, k),
            _ => surjection_moments_exact(n, k),
        }
        .map_err(|e| e.to_string())?;
        ensure(got == brute_moments(m, n, k), || format!("{m} ({n},{k})"))?;
    }
    Ok(format!("{} instances", cases.len()))
}

fn exact_moments(m: Model, n: u64, k: u64) -> ExactMoments {
    match m {
        Model::Composition => composition_moments_exact(n, k),
        _ => surjection_moments_exact(n, k),
    }
    .expect("feasible")
}

fn chung_erdos_grid() -> Outcome {
    let b = ExactBudget::default();
    let one = Ratio::from_integer(BigUint::one());
    let mut cases = 0;
    for m in [Model::Composition, Model::Surjection] {
        for n in 2..=14u64 {
            for k in 2..=n.min(6) {
                let mo = exact_moments(m, n, k);
                let bound = chung_erdos_lower_bound_exact(&mo.first, &mo.unordered_pair_sum());
                let p = prob_all_distinct_exact(m, n, k, b).map_err(|e| e.to_string())?;
                let union = &one - p.as_ratio();
                ensure(bound <= union, || format!("{m} ({n},{k}): bound {bound} > {union}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} instances"))
}

fn sandwich_ordering() -> Outcome {
    let grid = gupta_sandwich_grid(500, 20, ExactBudget::default()).map_err(|e| e.to_string())?;
    for s in &grid {
        ensure(s.is_ordered(), || format!("ordering at ({},{})", s.n, s.k))?;
        let lower_ok = &s.middle * factorial(s.k) >= compositions_count(s.n, s.k);
        ensure(lower_ok, || format!("k! p < C at ({},{})", s.n, s.k))?;
    }
    Ok(format!("{} instances", grid.len()))
}

fn transfer_consistency() -> Outcome {
    let b = ExactBudget::default();
    for n in 1..=12u64 {
        for k in 1..=n {
            let t = partition_threshold_transfer(n, k, b).map_err(|e| e.to_string())?;
            let one = Ratio::from_integer(BigUint::one());
            ensure(t.q_over_p.as_ratio() <= &one && t.d_over_c.as_ratio() <= &one, || {
                format!("ratio above 1 at ({n},{k})")
            })?;
            let direct = Ratio::new(
                BigUint::from(brute_count(CountFamily::DistinctComposition, n, k)),
                BigUint::from(brute_count(CountFamily::Composition, n, k)),
            );
            ensure(t.d_over_c.as_ratio() == &direct, || format!("D/C at ({n},{k})"))?;
        }
    }
    Ok("n <= 12".into())
}

fn entropy_bridge() -> Outcome {
    let mut cases = 0;
    let mut failure = None;
    for n in 1..=10u64 {
        for k in 1..=n {
            for_each_partition(n, k, |sizes| {
                let p = ClusterProfile::new(sizes.to_vec()).expect("positive sizes");
                let gap = dpi_gap(&p);
                if gap < 0.0 || (gap == 0.0) != has_distinct_parts(sizes) {
                    failure.get_or_insert_with(|| format!("{sizes:?}: gap {gap}"));
                }
                cases += 1;
            });
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(format!("{cases} profiles")),
    }
}

fn claim1_rows() -> Outcome {
    for k in [4u64, 10, 50] {
        let row = binomial_pmf_row(10_000, 2.0 / k as f64);
        let r = claim1_ratio(&row, 2).map_err(|e| e.to_string())?;
        ensure((r - 0.5).abs() <= 0.01, || format!("k = {k}: ratio {r}"))?;
    }
    Ok("n = 10^4, k in {4, 10, 50}".into())
}

fn samplers_fit() -> Outcome {
    let cases: [(Model, u64, u64); 8] = [
        (Model::Composition, 7, 3),
        (Model::Composition, 9, 4),
        (Model::Partition, 12, 4),
        (Model::Partition, 15, 3),
        (Model::Surjection, 5, 3),
        (Model::Surjection, 6, 2),
        (Model::SetPartition, 6, 3),
        (Model::SetPartition, 7, 2),
    ];
    let mut worst = 1.0f64;
    for (i, (m, n, k)) in cases.into_iter().enumerate() {
        let c = chi_square_sampler(m, n, k, 20_000, RngSpec::new(2024, i as u64)).map_err(|e| e.to_string())?;
        worst = worst.min(c.p_value);
        ensure(c.p_value > 0.001, || format!("{m} ({n},{k}): p = {:.2e}", c.p_value))?;
        let b = ExactBudget::default();
        let est = estimate_p_distinct(m, n, k, 20_000, RngSpec::new(2025, i as u64), b).map_err(|e| e.to_string())?;
        let exact = prob_all_distinct_exact(m, n, k, b).map_err(|e| e.to_string())?.to_f64();
        let tol = 4.0 * (exact * (1.0 - exact) / 20_000.0).sqrt();
        ensure((est.p_hat - exact).abs() <= tol, || format!("{m} ({n},{k}): MC {} vs {exact}", est.p_hat))?;
    }
    Ok(format!("min chi-square p {worst:.3}"))
}

/// Runs every check; a failing check does not stop the others.
pub fn run_all() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 13] = [
        ("counts_vs_enumeration", counts_vs_enumeration),
        ("count_identities", identities),
        ("log_counts_vs_exact", log_vs_exact),
        ("probabilities_vs_enumeration", probabilities_vs_enumeration),
        ("first_moments_vs_enumeration", first_moments_vs_enumeration),
        ("pair_terms_vs_enumeration", pair_terms_vs_enumeration),
        ("chung_erdos_below_union", chung_erdos_grid),
        ("sandwich_ordering", sandwich_ordering),
        ("transfer_consistency", transfer_consistency),
        ("entropy_bridge", entropy_bridge),
        ("claim1_binomial_rows", claim1_rows),
        ("samplers_fit_enumerated_law", samplers_fit),
        ("prob_log_vs_exact", prob_log_vs_exact),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(detail) => Check {
                name,
                passed: true,
                detail,
            },
            Err(detail) => Check {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}

fn prob_log_vs_exact() -> Outcome {
    let b = ExactBudget::unlimited();
    for n in 1..=40u64 {
        for k in 1..=n.min(8) {
            for m in Model::ALL {
                let exact = prob_all_distinct_exact(m, n, k, b).map_err(|e| e.to_string())?.to_f64();
                let lg = crate::probability::prob_all_distinct_log(m, n, k)
                    .map_err(|e| e.to_string())?
                    .value();
                let ok = if exact == 0.0 { lg == 0.0 } else { ((lg - exact) / exact).abs() < 1e-6 };
                ensure(ok, || format!("{m} ({n},{k}): {lg} vs {exact}"))?;
            }
        }
    }
    Ok("n <= 40, k <= 8".into())
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_check_passes() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
