//! Uniform samplers for the four models, reporting part (fiber, block) size
//! vectors.
//!
//! All randomness flows from an [`RngSpec`]: a 64-bit seed and a stream id
//! mapped onto ChaCha8 with the stream id as the ChaCha stream number, so
//! distinct stream ids give independent, reproducible sequences.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::counting::{ln_surjective_fraction, CountTable, ExactBudget, TableKind};
use crate::error::{Error, Result};
use crate::numeric::{factorial, uniform_below};
use crate::probability::Model;

/// Part sizes of one sampled object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartsVector {
    pub parts: Vec<u64>,
    pub total: u64,
}

impl PartsVector {
    pub fn new(parts: Vec<u64>) -> Self {
        let total = parts.iter().sum();
        PartsVector { parts, total }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn has_distinct_parts(&self) -> bool {
        has_distinct_parts(&self.parts)
    }
}

/// True iff no two entries are equal.
pub fn has_distinct_parts(parts: &[u64]) -> bool {
    let mut v = parts.to_vec();
    all_distinct_in_place(&mut v)
}

/// Sorts `parts` and checks adjacent entries.
pub fn all_distinct_in_place(parts: &mut [u64]) -> bool {
    parts.sort_unstable();
    parts.windows(2).all(|w| w[0] != w[1])
}

/// Seed and stream selecting one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngSpec { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A child stream keyed by `tag`; children of distinct tags (or of
    /// distinct parents) are distinct streams with overwhelming probability.
    pub fn substream(&self, tag: u64) -> RngSpec {
        RngSpec {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// How surjection fiber vectors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurjectionStrategy {
    /// Rejection when the onto-probability `F / k^n` is at least
    /// [`REJECTION_MIN_ACCEPTANCE`], exact otherwise (if in budget).
    Auto,
    /// Draw the fibers of a uniform function and retry until onto.
    Rejection,
    /// Sequential exact draw from surjection counts.
    Exact,
}

pub const REJECTION_MIN_ACCEPTANCE: f64 = 0.1;

enum Counts {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

/// Counts indexed by `(n, k)` with `0 <= k <= max_k`, stored in machine
/// words when the largest entry fits.
struct Table {
    width: usize,
    counts: Counts,
}

impl Table {
    fn from_cells(width: usize, cells: Vec<BigUint>) -> Table {
        let small: Option<Vec<u64>> = cells.iter().map(|c| c.to_u64()).collect();
        let counts = match small {
            Some(v) if v.iter().all(|&c| c < u64::MAX / 2) => Counts::Small(v),
            _ => Counts::Big(cells),
        };
        Table { width, counts }
    }
}

enum Kind {
    Composition,
    Partition(Table),
    SurjectionRejection,
    SurjectionExact(Table),
}

/// A reusable sampler for one `(model, n, k)`; builds whatever count tables
/// the exact strategies need once, then draws in `O(k)`-ish time.
pub struct Sampler {
    model: Model,
    n: u64,
    k: u64,
    kind: Kind,
}

impl Sampler {
    pub fn new(model: Model, n: u64, k: u64, budget: ExactBudget) -> Result<Self> {
        Self::with_strategy(model, n, k, SurjectionStrategy::Auto, budget)
    }

    pub fn with_strategy(
        model: Model,
        n: u64,
        k: u64,
        strategy: SurjectionStrategy,
        budget: ExactBudget,
    ) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Infeasible { n, k });
        }
        let kind = match model {
            Model::Composition => Kind::Composition,
            Model::Partition => {
                let t = CountTable::build(TableKind::PartitionP, n, k, budget)?;
                Kind::Partition(table_from(&t, n, k, |_, _, c| c.clone()))
            }
            Model::Surjection | Model::SetPartition => {
                let exact = match strategy {
                    SurjectionStrategy::Rejection => false,
                    SurjectionStrategy::Exact => true,
                    SurjectionStrategy::Auto => {
                        ln_surjective_fraction(n, k).exp() < REJECTION_MIN_ACCEPTANCE
                            && budget.check(ExactBudget::table_cells(n, k)).is_ok()
                    }
                };
                if exact {
                    let t = CountTable::build(TableKind::StirlingS, n, k, budget)?;
                    let facts: Vec<BigUint> = (0..=k).map(factorial).collect();
                    Kind::SurjectionExact(table_from(&t, n, k, |_, j, s| s * &facts[j as usize]))
                } else {
                    Kind::SurjectionRejection
                }
            }
        };
        Ok(Sampler { model, n, k, kind })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Which surjection strategy is in use, if this is a surjection-type
    /// sampler.
    pub fn surjection_strategy(&self) -> Option<SurjectionStrategy> {
        match self.kind {
            Kind::SurjectionRejection => Some(SurjectionStrategy::Rejection),
            Kind::SurjectionExact(_) => Some(SurjectionStrategy::Exact),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PartsVector {
        let mut buf = Vec::with_capacity(self.k as usize);
        self.sample_into(rng, &mut buf);
        PartsVector {
            parts: buf,
            total: self.n,
        }
    }

    /// Draws one object into `out` (cleared first). Composition and
    /// surjection vectors are ordered; partition and set-partition vectors
    /// are nonincreasing.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u64>) {
        out.clear();
        let (n, k) = (self.n, self.k);
        match &self.kind {
            Kind::Composition => composition_into(rng, n, k, out),
            Kind::Partition(t) => partition_into(rng, t, n, k, out),
            Kind::SurjectionRejection => rejection_fibers_into(rng, n, k, out),
            Kind::SurjectionExact(t) => exact_fibers_into(rng, t, n, k, out),
        }
        if self.model == Model::SetPartition {
            out.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
}

fn table_from(
    t: &CountTable,
    n: u64,
    k: u64,
    f: impl Fn(u64, u64, &BigUint) -> BigUint,
) -> Table {
    let width = k as usize + 1;
    let mut cells = Vec::with_capacity((n as usize + 1) * width);
    for i in 0..=n {
        for j in 0..=k {
            cells.push(f(i, j, t.get(i, j)));
        }
    }
    Table::from_cells(width, cells)
}

fn composition_into<R: Rng + ?Sized>(rng: &mut R, n: u64, k: u64, out: &mut Vec<u64>) {
    // a uniform (k-1)-subset of the n-1 gaps between n units
    let mut cuts: Vec<u64> = index::sample(rng, (n - 1) as usize, (k - 1) as usize)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(n - prev);
}

/// Unranks a uniform index along `p(m, j) = p(m-1, j-1) + p(m-j, j)`:
/// the first branch emits a part of size one (shifted by the number of
/// second-branch steps taken so far), the second lowers every part by one.
fn partition_into<R: Rng + ?Sized>(rng: &mut R, t: &Table, n: u64, k: u64, out: &mut Vec<u64>) {
    let (mut m, mut j, mut shift) = (n as usize, k as usize, 0u64);
    let w = t.width;
    match &t.counts {
        Counts::Small(c) => {
            let mut r = rng.random_range(0..c[m * w + j]);
            while j > 0 {
                let a = c[(m - 1) * w + (j - 1)];
                if r < a {
                    out.push(1 + shift);
                    m -= 1;
                    j -= 1;
                } else {
                    r -= a;
                    m -= j;
                    shift += 1;
                }
            }
        }
        Counts::Big(c) => {
            let mut r = uniform_below(rng, &c[m * w + j]);
            while j > 0 {
                let a = &c[(m - 1) * w + (j - 1)];
                if &r < a {
                    out.push(1 + shift);
                    m -= 1;
                    j -= 1;
                } else {
                    r -= a;
                    m -= j;
                    shift += 1;
                }
            }
        }
    }
    debug_assert_eq!(m, 0);
    out.reverse();
}

/// Fibers of a uniform function `[n] -> [k]` via sequential binomial
/// splitting (the multinomial law), retried until every fiber is nonempty.
fn rejection_fibers_into<R: Rng + ?Sized>(rng: &mut R, n: u64, k: u64, out: &mut Vec<u64>) {
    loop {
        out.clear();
        let mut rest = n;
        let mut onto = true;
        for i in 0..k - 1 {
            let p = 1.0 / (k - i) as f64;
            let m = if rest == 0 {
                0
            } else {
                Binomial::new(rest, p).expect("valid binomial").sample(rng)
            };
            onto &= m > 0;
            out.push(m);
            rest -= m;
        }
        onto &= rest > 0;
        out.push(rest);
        if onto {
            return;
        }
    }
}

/// Draws `m_1` with probability `binom(n, m) F(n - m, k - 1) / F(n, k)`,
/// then recurses on the remaining `n - m` points and `k - 1` boxes.
fn exact_fibers_into<R: Rng + ?Sized>(rng: &mut R, t: &Table, n: u64, k: u64, out: &mut Vec<u64>) {
    let w = t.width;
    let (mut rest, mut boxes) = (n as usize, k as usize);
    while boxes > 1 {
        let max_m = rest - (boxes - 1);
        let chosen = match &t.counts {
            Counts::Small(c) => {
                let mut r = rng.random_range(0..c[rest * w + boxes]) as u128;
                let mut binom: u128 = 1;
                let mut pick = max_m;
                for m in 1..=max_m {
                    binom = binom * (rest - m + 1) as u128 / m as u128;
                    let wgt = binom * c[(rest - m) * w + boxes - 1] as u128;
                    if r < wgt {
                        pick = m;
                        break;
                    }
                    r -= wgt;
                }
                pick
            }
            Counts::Big(c) => {
                let mut r = uniform_below(rng, &c[rest * w + boxes]);
                let mut binom = BigUint::from(1u32);
                let mut pick = max_m;
                for m in 1..=max_m {
                    binom = binom * (rest - m + 1) / m;
                    let wgt = &binom * &c[(rest - m) * w + boxes - 1];
                    if wgt.is_zero() {
                        continue;
                    }
                    if r < wgt {
                        pick = m;
                        break;
                    }
                    r -= wgt;
                }
                pick
            }
        };
        out.push(chosen as u64);
        rest -= chosen;
        boxes -= 1;
    }
    out.push(rest as u64);
}

/// Uniform composition of `n` into `k` positive parts.
pub fn sample_composition(n: u64, k: u64, spec: &RngSpec) -> Result<PartsVector> {
    let s = Sampler::new(Model::Composition, n, k, ExactBudget::default())?;
    Ok(s.sample(&mut spec.rng()))
}

/// Uniform partition of `n` into `k` parts, nonincreasing.
pub fn sample_partition(n: u64, k: u64, spec: &RngSpec, budget: ExactBudget) -> Result<PartsVector> {
    let s = Sampler::new(Model::Partition, n, k, budget)?;
    Ok(s.sample(&mut spec.rng()))
}

/// Fiber sizes `(|f^-1(1)|, ..., |f^-1(k)|)` of a uniform surjection.
pub fn sample_surjection_fibers(
    n: u64,
    k: u64,
    spec: &RngSpec,
    strategy: SurjectionStrategy,
    budget: ExactBudget,
) -> Result<PartsVector> {
    let s = Sampler::with_strategy(Model::Surjection, n, k, strategy, budget)?;
    Ok(s.sample(&mut spec.rng()))
}

/// Block sizes of a uniform `k`-block set partition, nonincreasing.
pub fn sample_set_partition_sizes(n: u64, k: u64, spec: &RngSpec, budget: ExactBudget) -> Result<PartsVector> {
    let s = Sampler::new(Model::SetPartition, n, k, budget)?;
    Ok(s.sample(&mut spec.rng()))
}

/// `count` consecutive draws from one stream.
pub fn sample_sequence(
    model: Model,
    n: u64,
    k: u64,
    count: usize,
    spec: &RngSpec,
    budget: ExactBudget,
) -> Result<Vec<PartsVector>> {
    let s = Sampler::new(model, n, k, budget)?;
    let mut rng = spec.rng();
    Ok((0..count).map(|_| s.sample(&mut rng)).collect())
}
