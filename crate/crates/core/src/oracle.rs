//! Brute-force enumerators over small instances, used as independent
//! oracles for the closed-form and dynamic-programming routines.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::Zero;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::counting::{CountFamily, ExactBudget};
use crate::error::{Error, Result};
use crate::moments::ExactMoments;
use crate::numeric::{factorial, CompensatedSum};
use crate::probability::Model;
use crate::samplers::{has_distinct_parts, RngSpec, Sampler};

/// Calls `visit` on every composition of `n` into `k` positive parts.
pub fn for_each_composition(n: u64, k: u64, mut visit: impl FnMut(&[u64])) {
    fn rec(rest: u64, slots: u64, cur: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
        if slots == 0 {
            if rest == 0 {
                visit(cur);
            }
            return;
        }
        if rest < slots {
            return;
        }
        let hi = if slots == 1 { rest } else { rest - (slots - 1) };
        let lo = if slots == 1 { rest } else { 1 };
        for v in lo..=hi {
            cur.push(v);
            rec(rest - v, slots - 1, cur, visit);
            cur.pop();
        }
    }
    if n == 0 && k == 0 {
        visit(&[]);
        return;
    }
    rec(n, k, &mut Vec::with_capacity(k as usize), &mut visit);
}

/// Calls `visit` on every partition of `n` into `k` parts, nonincreasing.
pub fn for_each_partition(n: u64, k: u64, mut visit: impl FnMut(&[u64])) {
    fn rec(rest: u64, slots: u64, max: u64, cur: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
        if slots == 0 {
            if rest == 0 {
                visit(cur);
            }
            return;
        }
        if rest < slots || rest > slots * max {
            return;
        }
        for v in (1..=max.min(rest - (slots - 1))).rev() {
            cur.push(v);
            rec(rest - v, slots - 1, v, cur, visit);
            cur.pop();
        }
    }
    if n == 0 && k == 0 {
        visit(&[]);
        return;
    }
    rec(n, k, n, &mut Vec::with_capacity(k as usize), &mut visit);
}

/// Calls `visit(labels, fiber_sizes)` on every surjection `[n] -> [k]`.
pub fn for_each_surjection(n: u64, k: u64, mut visit: impl FnMut(&[u64], &[u64])) {
    struct State<'a> {
        n: usize,
        k: usize,
        labels: Vec<u64>,
        sizes: Vec<u64>,
        used: usize,
        visit: &'a mut dyn FnMut(&[u64], &[u64]),
    }
    fn rec(s: &mut State<'_>, i: usize) {
        if i == s.n {
            if s.used == s.k {
                (s.visit)(&s.labels, &s.sizes);
            }
            return;
        }
        // every still-empty fiber needs one of the remaining elements
        if s.n - i < s.k - s.used {
            return;
        }
        for lab in 0..s.k {
            if s.sizes[lab] == 0 {
                s.used += 1;
            }
            s.sizes[lab] += 1;
            s.labels.push(lab as u64);
            rec(s, i + 1);
            s.labels.pop();
            s.sizes[lab] -= 1;
            if s.sizes[lab] == 0 {
                s.used -= 1;
            }
        }
    }
    if k == 0 {
        if n == 0 {
            visit(&[], &[]);
        }
        return;
    }
    let mut s = State {
        n: n as usize,
        k: k as usize,
        labels: Vec::with_capacity(n as usize),
        sizes: vec![0; k as usize],
        used: 0,
        visit: &mut visit,
    };
    rec(&mut s, 0);
}

/// Calls `visit(rgs, block_sizes)` on every set partition of `[n]` into
/// `k` blocks, encoded as a restricted growth string.
pub fn for_each_set_partition(n: u64, k: u64, mut visit: impl FnMut(&[u64], &[u64])) {
    fn rec(
        n: usize,
        k: usize,
        rgs: &mut Vec<u64>,
        sizes: &mut Vec<u64>,
        visit: &mut dyn FnMut(&[u64], &[u64]),
    ) {
        let i = rgs.len();
        let blocks = sizes.len();
        if i == n {
            if blocks == k {
                visit(rgs, sizes);
            }
            return;
        }
        if n - i < k - blocks {
            return;
        }
        for b in 0..blocks {
            rgs.push(b as u64);
            sizes[b] += 1;
            rec(n, k, rgs, sizes, visit);
            sizes[b] -= 1;
            rgs.pop();
        }
        if blocks < k {
            rgs.push(blocks as u64);
            sizes.push(1);
            rec(n, k, rgs, sizes, visit);
            sizes.pop();
            rgs.pop();
        }
    }
    if n == 0 && k == 0 {
        visit(&[], &[]);
        return;
    }
    if k == 0 {
        return;
    }
    rec(n as usize, k as usize, &mut Vec::new(), &mut Vec::new(), &mut visit);
}

/// Count by exhaustive enumeration.
pub fn brute_count(family: CountFamily, n: u64, k: u64) -> u64 {
    let mut c = 0u64;
    match family {
        CountFamily::Composition => for_each_composition(n, k, |_| c += 1),
        CountFamily::DistinctComposition => for_each_composition(n, k, |x| c += has_distinct_parts(x) as u64),
        CountFamily::Partition => for_each_partition(n, k, |_| c += 1),
        CountFamily::DistinctPartition => for_each_partition(n, k, |x| c += has_distinct_parts(x) as u64),
        CountFamily::Surjection => for_each_surjection(n, k, |_, _| c += 1),
        CountFamily::DistinctFiberSurjection => {
            for_each_surjection(n, k, |_, s| c += has_distinct_parts(s) as u64)
        }
        CountFamily::SetPartition => for_each_set_partition(n, k, |_, _| c += 1),
    }
    c
}

/// Surjection and distinct-fiber surjection counts from one enumeration.
pub fn brute_surjection_counts(n: u64, k: u64) -> (u64, u64) {
    let (mut all, mut distinct) = (0u64, 0u64);
    for_each_surjection(n, k, |_, s| {
        all += 1;
        distinct += has_distinct_parts(s) as u64;
    });
    (all, distinct)
}

/// Law of the part-size vector of a uniform object, as the sampler reports
/// it (ordered for compositions and surjections, nonincreasing otherwise),
/// with integer weights proportional to probability.
pub fn outcome_weights(model: Model, n: u64, k: u64) -> HashMap<Vec<u64>, u64> {
    let mut w: HashMap<Vec<u64>, u64> = HashMap::new();
    match model {
        Model::Composition => for_each_composition(n, k, |x| *w.entry(x.to_vec()).or_default() += 1),
        Model::Partition => for_each_partition(n, k, |x| *w.entry(x.to_vec()).or_default() += 1),
        Model::Surjection => for_each_surjection(n, k, |_, s| *w.entry(s.to_vec()).or_default() += 1),
        Model::SetPartition => for_each_set_partition(n, k, |_, s| {
            let mut v = s.to_vec();
            v.sort_unstable_by(|a, b| b.cmp(a));
            *w.entry(v).or_default() += 1;
        }),
    }
    w
}

fn multinomial(n: u64, parts: &[u64]) -> BigUint {
    parts.iter().fold(factorial(n), |acc, &m| acc / factorial(m))
}

/// Part-size vectors with their weights, where surjection weights are
/// multinomials summed over fiber-size compositions.
fn weighted_vectors(model: Model, n: u64, k: u64) -> Vec<(Vec<u64>, BigUint)> {
    let mut out = Vec::new();
    match model {
        Model::Composition => for_each_composition(n, k, |x| out.push((x.to_vec(), BigUint::from(1u32)))),
        Model::Surjection => for_each_composition(n, k, |x| out.push((x.to_vec(), multinomial(n, x)))),
        _ => panic!("moment oracle covers composition and surjection only"),
    }
    out
}

/// Moment sums by direct expectation: each vector contributes, per class
/// of equal parts of size `c`, `C(c, 2)` equal pairs, `c(c-1)(c-2)` ordered
/// 3-index event pairs and so on.
pub fn brute_moments(model: Model, n: u64, k: u64) -> ExactMoments {
    let mut total = BigUint::zero();
    let mut sums = [BigUint::zero(), BigUint::zero(), BigUint::zero(), BigUint::zero()];
    for (x, w) in weighted_vectors(model, n, k) {
        let mut classes: HashMap<u64, u64> = HashMap::new();
        for &v in &x {
            *classes.entry(v).or_default() += 1;
        }
        let (mut pairs, mut three, mut four) = (0u64, 0u64, 0u64);
        for &c in classes.values() {
            pairs += c * c.saturating_sub(1) / 2;
            three += c * c.saturating_sub(1) * c.saturating_sub(2);
            four += c * c.saturating_sub(1) * c.saturating_sub(2) * c.saturating_sub(3) / 4;
        }
        // ordered pairs of disjoint monochromatic index pairs
        let two_two = pairs * pairs - pairs - three;
        for (s, v) in sums.iter_mut().zip([pairs, three, four, two_two]) {
            *s += &w * v;
        }
        total += w;
    }
    let r = |s: &BigUint| Ratio::new(s.clone(), total.clone());
    ExactMoments {
        first: r(&sums[0]),
        three_index: r(&sums[1]),
        four_equal: (k >= 4).then(|| r(&sums[2])),
        two_two: (k >= 4).then(|| r(&sums[3])),
    }
}

/// `P(all parts distinct)` by enumeration.
pub fn brute_prob_all_distinct(model: Model, n: u64, k: u64) -> Ratio<BigUint> {
    let w = outcome_weights(model, n, k);
    let total: u64 = w.values().sum();
    let good: u64 = w.iter().filter(|(x, _)| has_distinct_parts(x)).map(|(_, c)| c).sum();
    Ratio::new(BigUint::from(good), BigUint::from(total))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `draws` sampler outputs against the
/// enumerated law.
pub fn chi_square_sampler(model: Model, n: u64, k: u64, draws: u64, spec: RngSpec) -> Result<ChiSquare> {
    let law = outcome_weights(model, n, k);
    if law.is_empty() {
        return Err(Error::Infeasible { n, k });
    }
    let total: u64 = law.values().sum();
    let sampler = Sampler::new(model, n, k, ExactBudget::default())?;
    let mut observed: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut rng = spec.rng();
    let mut buf = Vec::new();
    for _ in 0..draws {
        sampler.sample_into(&mut rng, &mut buf);
        *observed.entry(buf.clone()).or_default() += 1;
    }
    if observed.keys().any(|x| !law.contains_key(x)) {
        return Ok(ChiSquare {
            statistic: f64::INFINITY,
            df: law.len() as u64 - 1,
            p_value: 0.0,
        });
    }
    let mut stat = CompensatedSum::default();
    for (x, &w) in &law {
        let expected = draws as f64 * w as f64 / total as f64;
        let o = observed.get(x).copied().unwrap_or(0) as f64;
        stat.add((o - expected).powi(2) / expected);
    }
    let df = law.len() as u64 - 1;
    let statistic = stat.total();
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).expect("positive df").sf(statistic)
    };
    Ok(ChiSquare {
        statistic,
        df,
        p_value,
    })
}

/// Number of objects of the model, for choosing chi-square instances.
pub fn object_count(model: Model, n: u64, k: u64) -> BigUint {
    model.total_family().count(n, k)
}
