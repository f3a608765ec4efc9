//! First- and second-moment sums for the events
//! `A_ij(t) = {part i = part j = t}` in random compositions and random
//! surjections, the Chung–Erdős union lower bound, and the divisor-class
//! ratio used to halve or third sums over binomial-like sequences.
//!
//! Pair sums are reported over *ordered* pairs of distinct events, grouped
//! by index pattern:
//!
//! * `three_index`: the two index pairs share exactly one index (the common
//!   value must agree),
//! * `four_equal`: four distinct indices, all four parts equal,
//! * `two_two`: four distinct indices, parts equal in two pairs with any
//!   two values (equal values included, so `four_equal` is a sub-sum).
//!
//! With that convention `three_index + two_two` is exactly
//! `2 * sum_{A < B} P(A and B)`, the pair term of the Chung–Erdős bound.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::counting::{ln_surjection_column, ExactBudget};
use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, ln_binomial, log_sum_exp, CompensatedSum, LnFactorials};
use crate::probability::{prob_all_distinct, Model, Regime};

/// Largest `n` for which [`moments`] picks the big-rational route by
/// default.
pub const EXACT_MOMENT_MAX_N: u64 = 4000;

/// Exact moment sums as reduced big rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub first: Ratio<BigUint>,
    pub three_index: Ratio<BigUint>,
    pub four_equal: Option<Ratio<BigUint>>,
    pub two_two: Option<Ratio<BigUint>>,
}

impl ExactMoments {
    /// `sum_{A < B} P(A and B)` over unordered pairs of distinct events.
    pub fn unordered_pair_sum(&self) -> Ratio<BigUint> {
        let zero = Ratio::from_integer(BigUint::zero());
        (&self.three_index + self.two_two.as_ref().unwrap_or(&zero)) / BigUint::from(2u32)
    }

    pub fn to_f64(&self) -> Moments {
        let f = |r: &Ratio<BigUint>| crate::numeric::ratio_to_f64(r.numer(), r.denom());
        Moments {
            first: f(&self.first),
            pairs: PairTerms {
                three_index: f(&self.three_index),
                four_equal: self.four_equal.as_ref().map(f),
                two_two: self.two_two.as_ref().map(f),
            },
        }
    }
}

/// Second-moment pair sums (ordered pairs, see module docs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTerms {
    pub three_index: f64,
    /// `None` when `k < 4`.
    pub four_equal: Option<f64>,
    /// `None` when `k < 4`.
    pub two_two: Option<f64>,
}

impl PairTerms {
    /// The 2-2 term restricted to two different common values.
    pub fn two_two_distinct_values(&self) -> Option<f64> {
        Some(self.two_two? - self.four_equal?)
    }

    /// `2 * sum_{A < B} P(A and B)`.
    pub fn ordered_total(&self) -> f64 {
        self.three_index + self.two_two.unwrap_or(0.0)
    }

    /// `sum_{A < B} P(A and B)`.
    pub fn unordered_sum(&self) -> f64 {
        0.5 * self.ordered_total()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    /// Expected number of equal pairs, `sum_{i<j} sum_t P(A_ij(t))`.
    pub first: f64,
    pub pairs: PairTerms,
}

fn check_moment_input(model: Model, n: u64, k: u64) -> Result<()> {
    match model {
        Model::Composition | Model::Surjection => {}
        _ => {
            return Err(Error::InvalidInput(format!(
                "moment sums are defined for composition and surjection, not {model}"
            )))
        }
    }
    if k < 2 || k > n {
        return Err(Error::Infeasible { n, k });
    }
    Ok(())
}

fn index_multipliers(k: u64) -> (u64, u64, u64) {
    let pairs = k * (k - 1) / 2;
    let three = k * (k - 1) * k.saturating_sub(2);
    let two_two = if k >= 4 { pairs * ((k - 2) * (k - 3) / 2) } else { 0 };
    (pairs, three, two_two)
}

/// Compositions-count convention used inside the sums: `C(0, 0) = 1`.
fn compositions_big(m: u64, j: u64) -> BigUint {
    crate::counting::compositions_count(m, j)
}

fn ln_compositions(m: u64, j: u64) -> f64 {
    match (m, j) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => f64::NEG_INFINITY,
        _ if j > m => f64::NEG_INFINITY,
        _ => ln_binomial(m - 1, j - 1),
    }
}

/// Exact composition moment sums.
pub fn composition_moments_exact(n: u64, k: u64) -> Result<ExactMoments> {
    check_moment_input(Model::Composition, n, k)?;
    let (pairs, three, two_two_mult) = index_multipliers(k);
    let den = compositions_big(n, k);
    let sum_over = |step: u64, parts: u64, weight: &dyn Fn(u64) -> u64| -> BigUint {
        let mut acc = BigUint::zero();
        let mut t = 1;
        while step * t <= n {
            let c = compositions_big(n - step * t, parts);
            if !c.is_zero() {
                acc += c * weight(t);
            }
            t += 1;
        }
        acc
    };
    let ratio = |mult: u64, s: BigUint| Ratio::new(s * mult, den.clone());
    let first = ratio(pairs, sum_over(2, k - 2, &|_| 1));
    let three_index = if k >= 3 {
        ratio(three, sum_over(3, k - 3, &|_| 1))
    } else {
        Ratio::from_integer(BigUint::zero())
    };
    let (four_equal, two_two) = if k >= 4 {
        (
            Some(ratio(two_two_mult, sum_over(4, k - 4, &|_| 1))),
            // sum over l, t >= 1 grouped by s = l + t: s - 1 pairs each
            Some(ratio(two_two_mult, sum_over(2, k - 4, &|s| s - 1))),
        )
    } else {
        (None, None)
    };
    Ok(ExactMoments {
        first,
        three_index,
        four_equal,
        two_two,
    })
}

/// Composition moment sums evaluated in log space.
pub fn composition_moments_log(n: u64, k: u64) -> Result<Moments> {
    check_moment_input(Model::Composition, n, k)?;
    let (pairs, three, two_two_mult) = index_multipliers(k);
    let ln_den = ln_compositions(n, k);
    let sum_over = |step: u64, parts: u64, weight: &dyn Fn(u64) -> f64| -> f64 {
        let terms: Vec<f64> = (1..=n / step)
            .map(|t| ln_compositions(n - step * t, parts) + weight(t))
            .collect();
        (log_sum_exp(&terms) - ln_den).exp()
    };
    let first = pairs as f64 * sum_over(2, k - 2, &|_| 0.0);
    let three_index = if k >= 3 {
        three as f64 * sum_over(3, k - 3, &|_| 0.0)
    } else {
        0.0
    };
    let (four_equal, two_two) = if k >= 4 {
        (
            Some(two_two_mult as f64 * sum_over(4, k - 4, &|_| 0.0)),
            Some(two_two_mult as f64 * sum_over(2, k - 4, &|s| ((s - 1) as f64).ln())),
        )
    } else {
        (None, None)
    };
    Ok(Moments {
        first,
        pairs: PairTerms {
            three_index,
            four_equal,
            two_two,
        },
    })
}

/// `F(m, j)` for all `m <= n` at the requested `j` values, from the
/// Stirling recurrence.
fn surjection_columns(n: u64, js: &[u64]) -> Vec<Vec<BigUint>> {
    let kmax = js.iter().copied().max().unwrap_or(0) as usize;
    let facts: Vec<BigUint> = (0..=kmax as u64).map(factorial).collect();
    let mut s = vec![BigUint::zero(); kmax + 1];
    s[0] = BigUint::one();
    let mut cols: Vec<Vec<BigUint>> = js.iter().map(|_| Vec::with_capacity(n as usize + 1)).collect();
    let push = |cols: &mut Vec<Vec<BigUint>>, s: &[BigUint]| {
        for (c, &j) in cols.iter_mut().zip(js) {
            c.push(&s[j as usize] * &facts[j as usize]);
        }
    };
    push(&mut cols, &s);
    for _ in 1..=n {
        for j in (1..=kmax).rev() {
            let prev = std::mem::take(&mut s[j - 1]);
            s[j] = &s[j] * j + &prev;
            s[j - 1] = prev;
        }
        s[0] = BigUint::zero();
        push(&mut cols, &s);
    }
    cols
}

/// Exact surjection moment sums.
pub fn surjection_moments_exact(n: u64, k: u64) -> Result<ExactMoments> {
    check_moment_input(Model::Surjection, n, k)?;
    let (pairs, three, two_two_mult) = index_multipliers(k);
    let js = [k, k - 2, k.saturating_sub(3), k.saturating_sub(4)];
    let cols = surjection_columns(n, &js);
    let (f_k, f_k2, f_k3, f_k4) = (&cols[0], &cols[1], &cols[2], &cols[3]);
    let den = f_k[n as usize].clone();
    let nn = n as usize;

    // n! / (t!^r (n - r t)!) updated in place as t grows
    let multinomial_sum = |r: usize, col: &[BigUint], extra: &dyn Fn(usize) -> BigUint| -> BigUint {
        let mut acc = BigUint::zero();
        let mut coef = BigUint::one();
        let mut t = 0usize;
        while r * (t + 1) <= nn {
            let base = nn - r * t;
            for i in 0..r {
                coef *= base - i;
            }
            coef /= BigUint::from(t + 1).pow(r as u32);
            t += 1;
            let f = &col[nn - r * t];
            if !f.is_zero() {
                acc += &coef * f * extra(t);
            }
        }
        acc
    };
    let one = |_: usize| BigUint::one();
    let ratio = |mult: u64, s: BigUint| Ratio::new(s * mult, den.clone());
    let first = ratio(pairs, multinomial_sum(2, f_k2, &one));
    let three_index = if k >= 3 {
        ratio(three, multinomial_sum(3, f_k3, &one))
    } else {
        Ratio::from_integer(BigUint::zero())
    };
    let (four_equal, two_two) = if k >= 4 {
        // sum_{l + t = s, l, t >= 1} binom(s, l)^2 = binom(2s, s) - 2
        let central_minus_two = |s: usize| binomial(2 * s as u64, s as u64) - 2u32;
        (
            Some(ratio(two_two_mult, multinomial_sum(4, f_k4, &one))),
            Some(ratio(two_two_mult, multinomial_sum(2, f_k4, &central_minus_two))),
        )
    } else {
        (None, None)
    };
    Ok(ExactMoments {
        first,
        three_index,
        four_equal,
        two_two,
    })
}

/// `ln(binom(2s, s) - 2)`.
fn ln_central_minus_two(s: u64) -> f64 {
    if s <= 30 {
        ((binomial(2 * s, s).to_string().parse::<f64>().unwrap()) - 2.0).ln()
    } else {
        let lb = ln_binomial(2 * s, s);
        lb + (-2.0 * (-lb).exp()).ln_1p()
    }
}

/// Surjection moment sums evaluated in log space.
pub fn surjection_moments_log(n: u64, k: u64) -> Result<Moments> {
    check_moment_input(Model::Surjection, n, k)?;
    let (pairs, three, two_two_mult) = index_multipliers(k);
    let lnf = LnFactorials::new(n as usize);
    let ln_den = *ln_surjection_column(n, k).last().expect("nonempty");
    let col = |j: u64| ln_surjection_column(n, j);
    let nn = n as usize;
    let sum_over = |r: usize, col: &[f64], extra: &dyn Fn(usize) -> f64| -> f64 {
        let terms: Vec<f64> = (1..=nn / r)
            .map(|t| {
                lnf.get(nn) - r as f64 * lnf.get(t) - lnf.get(nn - r * t) + col[nn - r * t] + extra(t)
            })
            .collect();
        (log_sum_exp(&terms) - ln_den).exp()
    };
    let zero = |_: usize| 0.0;
    let first = pairs as f64 * sum_over(2, &col(k - 2), &zero);
    let three_index = if k >= 3 {
        three as f64 * sum_over(3, &col(k - 3), &zero)
    } else {
        0.0
    };
    let (four_equal, two_two) = if k >= 4 {
        let c4 = col(k - 4);
        (
            Some(two_two_mult as f64 * sum_over(4, &c4, &zero)),
            Some(two_two_mult as f64 * sum_over(2, &c4, &|s| ln_central_minus_two(s as u64))),
        )
    } else {
        (None, None)
    };
    Ok(Moments {
        first,
        pairs: PairTerms {
            three_index,
            four_equal,
            two_two,
        },
    })
}

/// Moment sums by the exact route for `n <= EXACT_MOMENT_MAX_N` (when the
/// table budget allows), log space otherwise.
pub fn moments(model: Model, n: u64, k: u64, budget: ExactBudget) -> Result<(Moments, Regime)> {
    check_moment_input(model, n, k)?;
    let exact_ok = n <= EXACT_MOMENT_MAX_N && budget.check(ExactBudget::table_cells(n, k)).is_ok();
    match (model, exact_ok) {
        (Model::Composition, true) => Ok((composition_moments_exact(n, k)?.to_f64(), Regime::Exact)),
        (Model::Surjection, true) => Ok((surjection_moments_exact(n, k)?.to_f64(), Regime::Exact)),
        (Model::Composition, false) => Ok((composition_moments_log(n, k)?, Regime::LogSpace)),
        _ => Ok((surjection_moments_log(n, k)?, Regime::LogSpace)),
    }
}

/// `binom(k, 2) sum_t binom(n-2t-1, k-3) / binom(n-1, k-1)`.
pub fn composition_first_moment(n: u64, k: u64) -> Result<f64> {
    Ok(moments(Model::Composition, n, k, ExactBudget::default())?.0.first)
}

/// Pair terms for compositions. At `k = 4` the 2-2 term is reported
/// absent here; [`moments`] still carries it for the union bound.
pub fn composition_pair_terms(n: u64, k: u64) -> Result<PairTerms> {
    let mut pairs = moments(Model::Composition, n, k, ExactBudget::default())?.0.pairs;
    if k == 4 {
        pairs.two_two = None;
    }
    Ok(pairs)
}

/// `binom(k, 2) sum_t binom(n, 2t) binom(2t, t) F(n-2t, k-2) / F(n, k)`.
pub fn surjection_first_moment(n: u64, k: u64) -> Result<f64> {
    Ok(moments(Model::Surjection, n, k, ExactBudget::default())?.0.first)
}

pub fn surjection_pair_terms(n: u64, k: u64) -> Result<PairTerms> {
    Ok(moments(Model::Surjection, n, k, ExactBudget::default())?.0.pairs)
}

/// Leading-order first moment: `k^3 / (4n)` for compositions,
/// `(k^2 / 4) sqrt(k / (2 pi n))` for surjections.
pub fn asymptotic_first_moment(model: Model, n: u64, k: u64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    match model {
        Model::Surjection | Model::SetPartition => k * k / 4.0 * (k / (2.0 * PI * n)).sqrt(),
        Model::Composition | Model::Partition => k.powi(3) / (4.0 * n),
    }
}

/// Leading-order 2-2 pair term: `k^6 / (16 n^2)` for compositions,
/// `k^5 / (32 pi n)` for surjections.
pub fn asymptotic_two_two(model: Model, n: u64, k: u64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    match model {
        Model::Surjection | Model::SetPartition => k.powi(5) / (32.0 * PI * n),
        Model::Composition | Model::Partition => k.powi(6) / (16.0 * n * n),
    }
}

/// `sum_t binom(n-2t-1, k-3) / binom(n-2, k-2)`, which tends to 1/2.
pub fn composition_half_sum_ratio(n: u64, k: u64) -> f64 {
    assert!(k >= 3 && n >= k);
    let terms: Vec<f64> = (1..=n / 2)
        .map(|t| ln_compositions(n - 2 * t, k - 2))
        .collect();
    (log_sum_exp(&terms) - ln_binomial(n - 2, k - 2)).exp()
}

/// Chung–Erdős: `P(union) >= (sum P)^2 / (sum P + 2 sum_{i<j} P(A_i A_j))`.
pub fn chung_erdos_lower_bound(sum_p: f64, sum_pairs: f64) -> f64 {
    assert!(sum_p >= 0.0 && sum_pairs >= 0.0, "negative input");
    if sum_p == 0.0 {
        return 0.0;
    }
    sum_p * sum_p / (sum_p + 2.0 * sum_pairs)
}

/// [`chung_erdos_lower_bound`] over exact rationals.
pub fn chung_erdos_lower_bound_exact(sum_p: &Ratio<BigUint>, sum_pairs: &Ratio<BigUint>) -> Ratio<BigUint> {
    if sum_p.is_zero() {
        return Ratio::from_integer(BigUint::zero());
    }
    (sum_p * sum_p) / (sum_p + sum_pairs * BigUint::from(2u32))
}

/// `(sum_{divisor | i} a_i) / (sum_i a_i)` with 1-based indices.
pub fn claim1_ratio(sequence: &[f64], divisor: u64) -> Result<f64> {
    if divisor == 0 {
        return Err(Error::InvalidInput("divisor must be at least 1".into()));
    }
    if sequence.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::InvalidInput("sequence entries must be nonnegative".into()));
    }
    let mut all = CompensatedSum::default();
    let mut hit = CompensatedSum::default();
    for (i, &a) in sequence.iter().enumerate() {
        all.add(a);
        if (i as u64 + 1) % divisor == 0 {
            hit.add(a);
        }
    }
    if all.total() == 0.0 {
        return Err(Error::AllZeroSequence);
    }
    Ok(hit.total() / all.total())
}

/// Binomial pmf row `b(n, i)` for `i = 0..=n`, in that order.
pub fn binomial_pmf_row(n: u64, p: f64) -> Vec<f64> {
    let lnf = LnFactorials::new(n as usize);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n as usize)
        .map(|i| (lnf.ln_binomial(n as usize, i) + i as f64 * lp + (n as usize - i) as f64 * lq).exp())
        .collect()
}

/// Moment sums, the Chung–Erdős bound and (when computable) the exact
/// union probability for one `(model, n, k)`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub model: Model,
    pub n: u64,
    pub k: u64,
    pub first_moment: f64,
    pub asymptotic_first: f64,
    /// `sum_{A < B} P(A and B)`.
    pub pair_sum: f64,
    pub pairs: PairTerms,
    pub chung_erdos_lower: f64,
    /// `1 - P(all distinct)`.
    pub exact_union_prob: Option<f64>,
    pub regime: Regime,
}

pub fn moment_report(model: Model, n: u64, k: u64, budget: ExactBudget) -> Result<MomentReport> {
    let (m, regime) = moments(model, n, k, budget)?;
    let pair_sum = m.pairs.unordered_sum();
    let exact_union_prob = prob_all_distinct(model, n, k, budget)
        .ok()
        .map(|r| match r.exact {
            Some(e) => {
                let one = Ratio::from_integer(BigUint::one());
                let u = one - e.as_ratio();
                crate::numeric::ratio_to_f64(u.numer(), u.denom())
            }
            None => 1.0 - r.value,
        });
    Ok(MomentReport {
        model,
        n,
        k,
        first_moment: m.first,
        asymptotic_first: asymptotic_first_moment(model, n, k),
        pair_sum,
        pairs: m.pairs,
        chung_erdos_lower: chung_erdos_lower_bound(m.first, pair_sum),
        exact_union_prob,
        regime,
    })
}
