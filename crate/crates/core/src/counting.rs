//! Exact big-integer counting kernels for the four surjective models and
//! their distinct-part restrictions, with log-space counterparts for
//! arguments where exact tables are out of reach.
//!
//! Edge conventions: every family counts 1 object at `n = k = 0` and 0
//! objects when exactly one of `n`, `k` is zero.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, ln_binomial, ln_factorial, log_add, LnFactorials, LogReal};

/// Default cap on exact-table work, in cells.
pub const DEFAULT_EXACT_BUDGET: u64 = 40_000_000;

/// Upper bound on the amount of big-integer table work an exact routine may
/// do before it reports [`Error::RegimeExceeded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactBudget {
    pub cells: u64,
}

impl Default for ExactBudget {
    fn default() -> Self {
        ExactBudget {
            cells: DEFAULT_EXACT_BUDGET,
        }
    }
}

impl ExactBudget {
    pub fn new(cells: u64) -> Self {
        ExactBudget { cells }
    }

    pub fn unlimited() -> Self {
        ExactBudget { cells: u64::MAX }
    }

    pub fn check(&self, needed: u128) -> Result<()> {
        if needed <= self.cells as u128 {
            Ok(())
        } else {
            Err(Error::RegimeExceeded {
                needed,
                budget: self.cells,
            })
        }
    }

    /// Table cells for a plain `(n, k)` table.
    pub fn table_cells(n: u64, k: u64) -> u128 {
        (n as u128 + 1) * (k as u128 + 1)
    }

    /// Cell updates of the distinct-fiber DP; roughly `n^2 (1 + ln k)` but
    /// bounded here by the cruder `n * n * k / 4`.
    pub fn distinct_fiber_cells(n: u64, k: u64) -> u128 {
        (n as u128 + 1) * (n as u128 + 1) * (k as u128 + 1) / 4
    }
}

/// The counting families exposed through [`log_count`] and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CountFamily {
    Composition,
    Partition,
    DistinctPartition,
    DistinctComposition,
    Surjection,
    DistinctFiberSurjection,
    SetPartition,
}

impl CountFamily {
    pub const ALL: [CountFamily; 7] = [
        CountFamily::Composition,
        CountFamily::Partition,
        CountFamily::DistinctPartition,
        CountFamily::DistinctComposition,
        CountFamily::Surjection,
        CountFamily::DistinctFiberSurjection,
        CountFamily::SetPartition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CountFamily::Composition => "composition",
            CountFamily::Partition => "partition",
            CountFamily::DistinctPartition => "distinct_partition",
            CountFamily::DistinctComposition => "distinct_composition",
            CountFamily::Surjection => "surjection",
            CountFamily::DistinctFiberSurjection => "distinct_fiber_surjection",
            CountFamily::SetPartition => "set_partition",
        }
    }

    /// Exact count of the family at `(n, k)`.
    pub fn count(self, n: u64, k: u64) -> BigUint {
        match self {
            CountFamily::Composition => compositions_count(n, k),
            CountFamily::Partition => partitions_count(n, k),
            CountFamily::DistinctPartition => distinct_partitions_count(n, k),
            CountFamily::DistinctComposition => distinct_compositions_count(n, k),
            CountFamily::Surjection => surjections_count(n, k),
            CountFamily::DistinctFiberSurjection => distinct_fiber_surjections_count(n, k),
            CountFamily::SetPartition => set_partitions_count(n, k),
        }
    }
}

impl fmt::Display for CountFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CountFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        CountFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == norm)
            .ok_or_else(|| Error::InvalidFamily(s.to_string()))
    }
}

/// Which recurrence a [`CountTable`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    /// `p(n, k) = p(n-1, k-1) + p(n-k, k)`
    PartitionP,
    /// `S(n, k) = k S(n-1, k) + S(n-1, k-1)`
    StirlingS,
    /// Pascal's rule.
    Binomial,
}

/// Memoized big-integer table over `0 <= n <= max_n`, `0 <= k <= max_k`.
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct CountTable {
    kind: TableKind,
    max_n: u64,
    max_k: u64,
    cells: Vec<BigUint>,
}

impl CountTable {
    pub fn build(kind: TableKind, max_n: u64, max_k: u64, budget: ExactBudget) -> Result<Self> {
        budget.check(ExactBudget::table_cells(max_n, max_k))?;
        let width = (max_k + 1) as usize;
        let mut cells = vec![BigUint::zero(); (max_n as usize + 1) * width];
        let idx = |n: usize, k: usize| n * width + k;
        cells[0] = BigUint::one();
        for n in 1..=max_n as usize {
            for k in 0..width {
                let v = match kind {
                    TableKind::PartitionP => {
                        if k == 0 || k > n {
                            BigUint::zero()
                        } else {
                            &cells[idx(n - 1, k - 1)] + &cells[idx(n - k, k)]
                        }
                    }
                    TableKind::StirlingS => {
                        if k == 0 {
                            BigUint::zero()
                        } else {
                            &cells[idx(n - 1, k)] * k + &cells[idx(n - 1, k - 1)]
                        }
                    }
                    TableKind::Binomial => {
                        if k == 0 {
                            BigUint::one()
                        } else {
                            &cells[idx(n - 1, k)] + &cells[idx(n - 1, k - 1)]
                        }
                    }
                };
                cells[idx(n, k)] = v;
            }
        }
        Ok(CountTable {
            kind,
            max_n,
            max_k,
            cells,
        })
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    pub fn max_k(&self) -> u64 {
        self.max_k
    }

    pub fn get(&self, n: u64, k: u64) -> &BigUint {
        assert!(n <= self.max_n && k <= self.max_k, "({n},{k}) outside table");
        &self.cells[(n * (self.max_k + 1) + k) as usize]
    }
}

fn degenerate(n: u64, k: u64) -> Option<BigUint> {
    match (n, k) {
        (0, 0) => Some(BigUint::one()),
        (0, _) | (_, 0) => Some(BigUint::zero()),
        _ if k > n => Some(BigUint::zero()),
        _ => None,
    }
}

/// `C(n, k) = binom(n-1, k-1)`.
pub fn compositions_count(n: u64, k: u64) -> BigUint {
    degenerate(n, k).unwrap_or_else(|| binomial(n - 1, k - 1))
}

/// Number of partitions of `m` into parts of size at most `k` (equivalently
/// into at most `k` parts), by a rolling coin-change DP in `O(m)` memory.
pub fn partitions_at_most(m: u64, k: u64) -> BigUint {
    let k = k.min(m);
    if m == 0 {
        return BigUint::one();
    }
    if k == 0 {
        return BigUint::zero();
    }
    match partitions_at_most_u128(m as usize, k as usize) {
        Some(v) => BigUint::from(v),
        None => partitions_at_most_big(m as usize, k as usize),
    }
}

fn partitions_at_most_u128(m: usize, k: usize) -> Option<u128> {
    let mut a = vec![0u128; m + 1];
    a[0] = 1;
    for part in 1..=k {
        for i in part..=m {
            a[i] = a[i].checked_add(a[i - part])?;
        }
    }
    Some(a[m])
}

fn partitions_at_most_big(m: usize, k: usize) -> BigUint {
    let mut a = vec![BigUint::zero(); m + 1];
    a[0] = BigUint::one();
    for part in 1..=k {
        for i in part..=m {
            let (lo, hi) = a.split_at_mut(i);
            hi[0] += &lo[i - part];
        }
    }
    a.swap_remove(m)
}

/// `p(n, k)`: partitions of `n` into exactly `k` positive parts.
pub fn partitions_count(n: u64, k: u64) -> BigUint {
    degenerate(n, k).unwrap_or_else(|| partitions_at_most(n - k, k))
}

/// `q(n, k) = p(n - binom(k, 2), k)`: partitions into `k` distinct parts.
pub fn distinct_partitions_count(n: u64, k: u64) -> BigUint {
    if let Some(v) = degenerate(n, k) {
        return v;
    }
    match n.checked_sub(k * (k - 1) / 2) {
        Some(shifted) => partitions_count(shifted, k),
        None => BigUint::zero(),
    }
}

/// `D(n, k) = k! q(n, k)`: compositions into `k` distinct parts.
pub fn distinct_compositions_count(n: u64, k: u64) -> BigUint {
    let q = distinct_partitions_count(n, k);
    if q.is_zero() {
        q
    } else {
        q * factorial(k)
    }
}

/// `F(n, k) = sum_j (-1)^j binom(k, j) (k - j)^n`.
pub fn surjections_count(n: u64, k: u64) -> BigUint {
    if let Some(v) = degenerate(n, k) {
        return v;
    }
    let mut acc = BigInt::zero();
    for j in 0..=k {
        let term = BigInt::from(binomial(k, j)) * BigInt::from(BigUint::from(k - j).pow(n as u32));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    debug_assert!(acc.sign() != Sign::Minus);
    acc.to_biguint().expect("surjection count is nonnegative")
}

/// `S(n, k) = F(n, k) / k!`.
pub fn set_partitions_count(n: u64, k: u64) -> BigUint {
    let f = surjections_count(n, k);
    if f.is_zero() {
        return f;
    }
    let kf = factorial(k);
    debug_assert!((&f % &kf).is_zero());
    f / kf
}

/// Surjections `[n] -> [k]` whose fibers have pairwise distinct sizes:
/// `k!` times the sum of multinomials `n! / (m_1! ... m_k!)` over sets of
/// `k` distinct positive sizes summing to `n`.
pub fn distinct_fiber_surjections_count(n: u64, k: u64) -> BigUint {
    if let Some(v) = degenerate(n, k) {
        return v;
    }
    let (n, k) = (n as usize, k as usize);
    let min_total = k * (k + 1) / 2;
    if n < min_total {
        return BigUint::zero();
    }
    let pascal = pascal_rows(n);
    // ways[j][r]: sum over j-sets of distinct sizes (all <= current s)
    // with total r of r! / prod(m!).
    let mut ways = vec![vec![BigUint::zero(); n + 1]; k + 1];
    ways[0][0] = BigUint::one();
    let max_part = n - k * (k - 1) / 2;
    for s in 1..=max_part {
        for j in (1..=k.min(s)).rev() {
            let Some((lo, hi)) = fiber_state_range(n, k, j, s) else {
                continue;
            };
            let (prev, cur) = ways.split_at_mut(j);
            let prev = &prev[j - 1];
            let cur = &mut cur[0];
            for r in (lo.max(s)..=hi).rev() {
                let src = &prev[r - s];
                if !src.is_zero() {
                    cur[r] += src * &pascal[r][s];
                }
            }
        }
    }
    std::mem::take(&mut ways[k][n]) * factorial(k as u64)
}

/// Range of partial totals `r` worth tracking for `j` chosen sizes once all
/// sizes `<= s` have been considered: the remaining `k - j` sizes are all
/// `> s` and distinct.
fn fiber_state_range(n: usize, k: usize, j: usize, s: usize) -> Option<(usize, usize)> {
    if j == k {
        return Some((n, n));
    }
    let rest = k - j;
    let reserve = rest * (s + 1) + rest * (rest - 1) / 2;
    let hi = n.checked_sub(reserve)?;
    let lo = j * (j + 1) / 2;
    (lo <= hi).then_some((lo, hi))
}

fn pascal_rows(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigUint::one()]);
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = Vec::with_capacity(r + 1);
        row.push(BigUint::one());
        for c in 1..r {
            row.push(&prev[c - 1] + &prev[c]);
        }
        row.push(BigUint::one());
        rows.push(row);
    }
    rows
}

// ---------------------------------------------------------------------------
// Log-space routes
// ---------------------------------------------------------------------------

/// Natural log of the count of `family` at `(n, k)`, computed without big
/// integers: log-gamma for binomials, exponentially tilted DPs for partition
/// numbers, and log-sum-exp recurrences for surjection counts.
pub fn log_count(family: CountFamily, n: u64, k: u64) -> LogReal {
    if let Some(v) = degenerate(n, k) {
        return if v.is_zero() { LogReal::ZERO } else { LogReal::ONE };
    }
    let ln = match family {
        CountFamily::Composition => ln_binomial(n - 1, k - 1),
        CountFamily::Partition => ln_partitions_at_most(n - k, k),
        CountFamily::DistinctPartition => match n.checked_sub(k * (k + 1) / 2) {
            Some(m) => ln_partitions_at_most(m, k),
            None => f64::NEG_INFINITY,
        },
        CountFamily::DistinctComposition => match n.checked_sub(k * (k + 1) / 2) {
            Some(m) => ln_factorial(k) + ln_partitions_at_most(m, k),
            None => f64::NEG_INFINITY,
        },
        CountFamily::Surjection => ln_surjections(n, k),
        CountFamily::DistinctFiberSurjection => ln_distinct_fiber_surjections(n, k),
        CountFamily::SetPartition => ln_surjections(n, k) - ln_factorial(k),
    };
    LogReal::from_ln(ln)
}

/// String-tagged entry point for [`log_count`].
pub fn log_count_tagged(tag: &str, n: u64, k: u64) -> Result<LogReal> {
    Ok(log_count(tag.parse()?, n, k))
}

/// `sum_{l <= k} l / (e^{beta l} - 1)`: mean of a partition under the tilt
/// `x = e^{-beta}` restricted to parts `<= k`.
fn tilted_mean(beta: f64, k: usize) -> f64 {
    (1..=k).map(|l| l as f64 / (beta * l as f64).exp_m1()).sum()
}

/// Tilt `beta` whose tilted mean over parts `<= k` equals `target`.
fn solve_tilt(target: f64, k: usize) -> f64 {
    let target = target.max(1e-3);
    let (mut lo, mut hi) = (-60.0f64, 20.0f64); // ln beta
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted_mean(mid.exp(), k) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// `-sum_{l <= k} ln(1 - e^{-beta l})`.
fn ln_tilted_mass(beta: f64, parts: std::ops::RangeInclusive<usize>) -> f64 {
    parts.map(|l| -(-(-beta * l as f64).exp_m1()).ln()).sum()
}

/// `ln` of the number of partitions of `m` into parts `<= k`.
///
/// Runs the coin-change DP on the exponentially tilted, normalized weights
/// `P(i) x^i / Z` with `x` chosen so that the tilted mean sits at `m`. Every
/// intermediate value is a probability, so nothing overflows and only
/// negligible tails underflow.
pub fn ln_partitions_at_most(m: u64, k: u64) -> f64 {
    let k = k.min(m) as usize;
    let m = m as usize;
    if m == 0 {
        return 0.0;
    }
    if k == 0 {
        return f64::NEG_INFINITY;
    }
    if k == 1 {
        return 0.0;
    }
    let beta = solve_tilt(m as f64, k);
    let mut u = vec![0.0f64; m + 1];
    u[0] = 1.0;
    for l in 1..=k {
        tilted_pass(&mut u, l, beta);
    }
    u[m].ln() + beta * m as f64 + ln_tilted_mass(beta, 1..=k)
}

/// One coin-change pass adding parts of size `l` under tilt `beta`:
/// `u[i] <- (1 - x^l) u[i] + x^l u[i - l]`.
#[inline]
fn tilted_pass(u: &mut [f64], l: usize, beta: f64) {
    let c = (-beta * l as f64).exp();
    let a = -(-beta * l as f64).exp_m1();
    let head = l.min(u.len());
    for v in u[..head].iter_mut() {
        *v *= a;
    }
    for i in l..u.len() {
        u[i] = a * u[i] + c * u[i - l];
    }
}

/// One stage of a [`PartitionSweep`]: log counts at a fixed `n` for `k`
/// parts.
#[derive(Debug, Clone, Copy)]
pub struct SweepStage {
    pub k: u64,
    /// `ln p(n, k)`
    pub ln_p: f64,
    /// `ln q(n, k)`; `-inf` when `n < binom(k + 1, 2)`.
    pub ln_q: f64,
}

impl SweepStage {
    /// `q(n, k) / p(n, k)`.
    pub fn distinct_ratio(&self) -> f64 {
        (self.ln_q - self.ln_p).exp()
    }
}

/// Incremental tilted DP over `k = 1, 2, ...` at fixed `n`, yielding
/// `ln p(n, k)` and `ln q(n, k)` for every `k` in one `O(n k)` pass. The
/// tilt is re-centred at each stage so that `p(n, k)` stays in range.
pub struct PartitionSweep {
    n: u64,
    u: Vec<f64>,
    beta: f64,
    k: u64,
}

impl PartitionSweep {
    pub fn new(n: u64) -> Self {
        let len = n.max(1) as usize;
        let mut u = vec![0.0f64; len];
        u[0] = 1.0;
        PartitionSweep {
            n,
            u,
            beta: 1.0,
            k: 0,
        }
    }

    fn retilt(&mut self, beta: f64) {
        let k = self.k as usize;
        if k == 0 {
            // a point mass at 0 is tilt-invariant
            self.beta = beta;
            return;
        }
        let shift = ln_tilted_mass(self.beta, 1..=k) - ln_tilted_mass(beta, 1..=k);
        let step = -(beta - self.beta);
        const RESYNC: usize = 256;
        for (block, chunk) in self.u.chunks_mut(RESYNC).enumerate() {
            let base = block * RESYNC;
            let mut f = (step * base as f64 + shift).exp();
            let r = step.exp();
            for v in chunk.iter_mut() {
                if *v != 0.0 {
                    *v *= f;
                }
                f *= r;
            }
        }
        self.beta = beta;
    }
}

impl Iterator for PartitionSweep {
    type Item = SweepStage;

    fn next(&mut self) -> Option<SweepStage> {
        let k = self.k + 1;
        if k > self.n {
            return None;
        }
        let target = (self.n - k) as f64;
        let beta = solve_tilt(target, k as usize);
        self.retilt(beta);
        self.k = k;
        tilted_pass(&mut self.u, k as usize, beta);
        let ln_mass = ln_tilted_mass(beta, 1..=k as usize);
        let at = |m: u64| -> f64 {
            let v = self.u[m as usize];
            if v > 0.0 {
                v.ln() + beta * m as f64 + ln_mass
            } else {
                f64::NEG_INFINITY
            }
        };
        let ln_p = at(self.n - k);
        let ln_q = match self.n.checked_sub(k * (k + 1) / 2) {
            Some(m) => at(m),
            None => f64::NEG_INFINITY,
        };
        Some(SweepStage { k, ln_p, ln_q })
    }
}

/// `ln F(n, k)` for `1 <= k <= n`.
///
/// When `k (1 - 1/k)^n` is small the inclusion-exclusion series for
/// `F / k^n` has geometrically shrinking terms and is summed directly;
/// otherwise the Stirling recurrence is run in log space.
pub fn ln_surjections(n: u64, k: u64) -> f64 {
    if let Some(v) = degenerate(n, k) {
        return if v.is_zero() { f64::NEG_INFINITY } else { 0.0 };
    }
    match ln_surjective_fraction_series(n, k) {
        Some(ln_frac) => n as f64 * (k as f64).ln() + ln_frac,
        None => *ln_surjection_column(n, k).last().expect("nonempty column"),
    }
}

/// `ln(F(n, k) / k^n)` via the alternating series, when it is well
/// conditioned.
fn ln_surjective_fraction_series(n: u64, k: u64) -> Option<f64> {
    let kf = k as f64;
    let first = (kf.ln() + n as f64 * (-1.0 / kf).ln_1p()).exp();
    if !(first <= 1e-3) {
        return None;
    }
    let mut tail = 0.0;
    for j in 1..=k {
        let ln_term = ln_binomial(k, j) + n as f64 * (-(j as f64) / kf).ln_1p();
        let term = ln_term.exp();
        tail += if j % 2 == 1 { -term } else { term };
        if term < 1e-18 * first {
            break;
        }
    }
    Some(tail.ln_1p())
}

/// Log of the probability that a uniform function `[n] -> [k]` is onto.
pub fn ln_surjective_fraction(n: u64, k: u64) -> f64 {
    if k == 0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_surjections(n, k) - n as f64 * (k as f64).ln()
}

/// `ln F(m, k)` for every `m` in `0..=n_max`, from the Stirling recurrence
/// in log space (`-inf` where `F = 0`).
pub fn ln_surjection_column(n_max: u64, k: u64) -> Vec<f64> {
    let k = k as usize;
    let ln_kf = ln_factorial(k as u64);
    let ln_j: Vec<f64> = (0..=k).map(|j| (j as f64).ln()).collect();
    let mut s = vec![f64::NEG_INFINITY; k + 1];
    s[0] = 0.0;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(if k == 0 { 0.0 } else { f64::NEG_INFINITY });
    for _m in 1..=n_max {
        for j in (1..=k).rev() {
            s[j] = log_add(ln_j[j] + s[j], s[j - 1]);
        }
        s[0] = f64::NEG_INFINITY;
        out.push(s[k] + ln_kf);
    }
    out
}

/// `ln` of [`distinct_fiber_surjections_count`], from the same size-by-size
/// DP carried out in log space with weights `1 / m!`.
pub fn ln_distinct_fiber_surjections(n: u64, k: u64) -> f64 {
    if let Some(v) = degenerate(n, k) {
        return if v.is_zero() { f64::NEG_INFINITY } else { 0.0 };
    }
    let (n, k) = (n as usize, k as usize);
    if n < k * (k + 1) / 2 {
        return f64::NEG_INFINITY;
    }
    let lnf = LnFactorials::new(n);
    let mut ways = vec![vec![f64::NEG_INFINITY; n + 1]; k + 1];
    ways[0][0] = 0.0;
    let max_part = n - k * (k - 1) / 2;
    for s in 1..=max_part {
        let w = -lnf.get(s);
        for j in (1..=k.min(s)).rev() {
            let Some((lo, hi)) = fiber_state_range(n, k, j, s) else {
                continue;
            };
            let (prev, cur) = ways.split_at_mut(j);
            let prev = &prev[j - 1];
            let cur = &mut cur[0];
            for r in lo.max(s)..=hi {
                let src = prev[r - s];
                if src != f64::NEG_INFINITY {
                    cur[r] = log_add(cur[r], src + w);
                }
            }
        }
    }
    ways[k][n] + lnf.get(n) + lnf.get(k)
}
