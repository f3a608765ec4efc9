//! Numeric plumbing shared by the exact and log-space routes: a log-domain
//! real, big-integer helpers and compensated summation.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A nonnegative real stored as its natural logarithm.
///
/// Zero is carried by an explicit flag so that `ln 0` never leaks into
/// arithmetic as `-inf`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogReal {
    pub log_value: f64,
    pub is_zero: bool,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        log_value: f64::NEG_INFINITY,
        is_zero: true,
    };
    pub const ONE: LogReal = LogReal {
        log_value: 0.0,
        is_zero: false,
    };

    /// Wraps a natural logarithm. `-inf` maps to zero.
    pub fn from_ln(log_value: f64) -> Self {
        if log_value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal {
                log_value,
                is_zero: false,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "LogReal::from_f64 on negative value {x}");
        Self::from_ln(x.ln())
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.is_zero() {
            Self::ZERO
        } else {
            Self::from_ln(ln_biguint(x))
        }
    }

    /// The natural log, or `None` for zero.
    pub fn ln(self) -> Option<f64> {
        (!self.is_zero).then_some(self.log_value)
    }

    pub fn value(self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_value.exp()
        }
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero, "reciprocal of zero LogReal");
        Self::from_ln(-self.log_value)
    }
}

impl Add for LogReal {
    type Output = LogReal;

    fn add(self, rhs: LogReal) -> LogReal {
        match (self.is_zero, rhs.is_zero) {
            (true, _) => rhs,
            (_, true) => self,
            _ => LogReal::from_ln(log_add(self.log_value, rhs.log_value)),
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero || rhs.is_zero {
            LogReal::ZERO
        } else {
            LogReal::from_ln(self.log_value + rhs.log_value)
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;

    fn div(self, rhs: LogReal) -> LogReal {
        self * rhs.recip()
    }
}

impl PartialEq for LogReal {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero, other.is_zero) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            _ => self.log_value.partial_cmp(&other.log_value),
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Log-sum-exp over natural-log terms with compensated accumulation.
/// Returns `-inf` for an empty slice or when every term is `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut acc = CompensatedSum::default();
    for &t in terms {
        acc.add((t - max).exp());
    }
    max + acc.total().ln()
}

/// Natural log of a positive big integer, accurate to double precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().expect("64-bit value fits in f64");
    top.ln() + shift as f64 * LN_2
}

/// `num / den` rounded to double precision; handles operands far outside
/// the f64 range.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "division by zero");
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mantissa = q.to_f64().expect("quotient has ~64 bits");
    scale_pow2(mantissa, -shift)
}

fn scale_pow2(x: f64, exp: i64) -> f64 {
    let mut x = x;
    let mut e = exp;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k <= 256 {
        let mut acc = CompensatedSum::default();
        for i in 1..=k {
            acc.add(((n - k + i) as f64 / i as f64).ln());
        }
        acc.total()
    } else {
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// Table of `ln m!` for `m <= max`, accumulated with compensation.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = CompensatedSum::default();
        table.push(0.0);
        for m in 1..=max {
            acc.add((m as f64).ln());
            table.push(acc.total());
        }
        LnFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn get(&self, m: usize) -> f64 {
        self.table[m]
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            f64::NEG_INFINITY
        } else {
            self.table[n] - self.table[k] - self.table[n - k]
        }
    }
}

/// Uniform draw from `[0, bound)` by rejection on the bit length of `bound`.
pub fn uniform_below<R: Rng + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.random_range(0..b));
    }
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let mask = if top_bits == 32 {
        u32::MAX
    } else {
        (1u32 << top_bits) - 1
    };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
        digits[words - 1] &= mask;
        let x = BigUint::new(digits);
        if &x < bound {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_real_arithmetic() {
        let a = LogReal::from_f64(2.0);
        let b = LogReal::from_f64(3.0);
        assert!(((a + b).value() - 5.0).abs() < 1e-12);
        assert!(((a * b).value() - 6.0).abs() < 1e-12);
        assert!(((b / a).value() - 1.5).abs() < 1e-12);
        assert_eq!(a + LogReal::ZERO, a);
        assert!((a * LogReal::ZERO).is_zero);
        assert!(LogReal::ZERO < a && a < b);
    }

    #[test]
    fn ln_of_huge_integers() {
        let x = BigUint::one() << 5000u32;
        assert!((ln_biguint(&x) - 5000.0 * LN_2).abs() < 1e-9);
        let y = factorial(30);
        assert!((ln_biguint(&y) - ln_factorial(30)).abs() < 1e-12);
    }

    #[test]
    fn ratio_far_outside_f64_range() {
        let num = factorial(400) * 3u32;
        let den = factorial(400) * 7u32;
        assert!((ratio_to_f64(&num, &den) - 3.0 / 7.0).abs() < 1e-16);
        let tiny = ratio_to_f64(&BigUint::one(), &(BigUint::one() << 1100u32));
        assert_eq!(tiny, 0.0);
        let small = ratio_to_f64(&BigUint::one(), &(BigUint::one() << 1000u32));
        assert!((small.ln() + 1000.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn ln_binomial_routes_agree() {
        for &(n, k) in &[(10u64, 3u64), (1000, 10), (10_000, 400), (5000, 2500)] {
            let exact = ln_biguint(&binomial(n, k));
            assert!((ln_binomial(n, k) - exact).abs() < 1e-9, "({n},{k})");
        }
        let table = LnFactorials::new(10_000);
        let exact = ln_biguint(&binomial(10_000, 5000));
        assert!((table.ln_binomial(10_000, 5000) - exact).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + LN_2)).abs() < 1e-12);
    }
}
