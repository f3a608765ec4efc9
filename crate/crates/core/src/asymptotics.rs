//! Checks on the Erdős–Lehner formula `p(n, k) ~ C(n, k) / k!`, Gupta's
//! two-sided bound, and the transfer of thresholds between compositions
//! and partitions.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{
    compositions_count, distinct_compositions_count, distinct_partitions_count, partitions_count,
    ExactBudget,
};
use crate::error::{Error, Result};
use crate::numeric::{factorial, ln_binomial, ratio_to_f64};
use crate::probability::BigRatio;

/// `C(n, k) / k! <= p(n, k) <= C(n + binom(k, 2), k) / k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub n: u64,
    pub k: u64,
    pub lower: BigRatio,
    pub middle: BigUint,
    pub upper: BigRatio,
    /// `k! p(n, k) / binom(n-1, k-1)`.
    pub ratio_to_el: f64,
}

impl SandwichReport {
    pub fn is_ordered(&self) -> bool {
        let mid = Ratio::from_integer(self.middle.clone());
        self.lower.as_ratio() <= &mid && &mid <= self.upper.as_ratio()
    }

    pub const CSV_HEADER: &'static str = "n,k,lower,middle,upper,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.12}",
            self.n,
            self.k,
            self.lower.to_f64(),
            self.middle,
            self.upper.to_f64(),
            self.ratio_to_el
        )
    }
}

fn check_input(n: u64, k: u64) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::Infeasible { n, k })
    } else {
        Ok(())
    }
}

/// Builds the report from an already known `p(n, k)`.
pub fn sandwich_from_p(n: u64, k: u64, p: BigUint) -> SandwichReport {
    let kf = factorial(k);
    let c = compositions_count(n, k);
    let c_shift = compositions_count(n + k * (k - 1) / 2, k);
    let ratio_to_el = ratio_to_f64(&(&p * &kf), &c);
    SandwichReport {
        n,
        k,
        lower: BigRatio::new(c, kf.clone()),
        middle: p,
        upper: BigRatio::new(c_shift, kf),
        ratio_to_el,
    }
}

pub fn gupta_sandwich(n: u64, k: u64, budget: ExactBudget) -> Result<SandwichReport> {
    check_input(n, k)?;
    budget.check(ExactBudget::table_cells(n, k))?;
    Ok(sandwich_from_p(n, k, partitions_count(n, k)))
}

/// Sandwich reports for every `1 <= k <= min(n, max_k)`, `1 <= n <= max_n`,
/// from one rolling pass of the coin DP per `k`.
pub fn gupta_sandwich_grid(max_n: u64, max_k: u64, budget: ExactBudget) -> Result<Vec<SandwichReport>> {
    budget.check(ExactBudget::table_cells(max_n, max_k))?;
    // a[m] = partitions of m into parts <= j, after processing part j
    let mut a = vec![BigUint::zero(); max_n as usize + 1];
    a[0] = BigUint::one();
    let mut out = Vec::new();
    for k in 1..=max_k.min(max_n) as usize {
        for i in k..a.len() {
            let (lo, hi) = a.split_at_mut(i);
            hi[0] += &lo[i - k];
        }
        let reports: Vec<SandwichReport> = (k as u64..=max_n)
            .into_par_iter()
            .map(|n| sandwich_from_p(n, k as u64, a[(n - k as u64) as usize].clone()))
            .collect();
        out.extend(reports);
    }
    Ok(out)
}

/// `(n, k! p(n, k) / binom(n-1, k-1))` along an ascending grid.
pub fn el_ratio_curve(k: u64, n_grid: &[u64], budget: ExactBudget) -> Result<Vec<(u64, f64)>> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n grid must be strictly ascending".into()));
    }
    n_grid
        .par_iter()
        .map(|&n| gupta_sandwich(n, k, budget).map(|r| (n, r.ratio_to_el)))
        .collect()
}

/// `binom(n + binom(k, 2) - 1, k - 1) / binom(n - 1, k - 1)`.
pub fn binomial_shift_ratio(n: u64, k: u64) -> Result<f64> {
    check_input(n, k)?;
    let shift = k * (k - 1) / 2;
    Ok((ln_binomial(n + shift - 1, k - 1) - ln_binomial(n - 1, k - 1)).exp())
}

/// `q(n, k) / p(n, k)` and `D(n, k) / C(n, k)`, exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub n: u64,
    pub k: u64,
    pub q_over_p: BigRatio,
    pub d_over_c: BigRatio,
}

impl TransferReport {
    pub fn as_f64(&self) -> (f64, f64) {
        (self.q_over_p.to_f64(), self.d_over_c.to_f64())
    }
}

impl Serialize for TransferReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TransferReport", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("q_over_p", &self.q_over_p.to_f64())?;
        st.serialize_field("d_over_c", &self.d_over_c.to_f64())?;
        st.end()
    }
}

pub fn partition_threshold_transfer(n: u64, k: u64, budget: ExactBudget) -> Result<TransferReport> {
    check_input(n, k)?;
    budget.check(ExactBudget::table_cells(n, k))?;
    let q = distinct_partitions_count(n, k);
    let p = partitions_count(n, k);
    let d = distinct_compositions_count(n, k);
    let c = compositions_count(n, k);
    if p.is_zero() || c.is_zero() {
        return Err(Error::Infeasible { n, k });
    }
    Ok(TransferReport {
        n,
        k,
        q_over_p: BigRatio::new(q, p),
        d_over_c: BigRatio::new(d, c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: u64, b: u64) -> BigRatio {
        BigRatio::new(BigUint::from(a), BigUint::from(b))
    }

    #[test]
    fn sandwich_examples() {
        let s = gupta_sandwich(7, 3, ExactBudget::default()).unwrap();
        assert_eq!(s.lower, r(5, 2));
        assert_eq!(s.middle, BigUint::from(4u32));
        assert_eq!(s.upper, r(6, 1));
        assert!(s.is_ordered());
        for n in 1..30 {
            let s = gupta_sandwich(n, 1, ExactBudget::default()).unwrap();
            assert_eq!(s.lower, r(1, 1));
            assert_eq!(s.upper, r(1, 1));
            assert_eq!(s.middle, BigUint::one());
        }
        assert!(gupta_sandwich(3, 4, ExactBudget::default()).is_err());
    }

    #[test]
    fn grid_matches_pointwise() {
        let grid = gupta_sandwich_grid(40, 6, ExactBudget::default()).unwrap();
        assert_eq!(grid.len(), (1..=6).map(|k| 41 - k).sum::<usize>());
        for s in &grid {
            assert_eq!(s, &gupta_sandwich(s.n, s.k, ExactBudget::default()).unwrap());
            assert!(s.is_ordered() && s.ratio_to_el >= 1.0);
        }
    }

    #[test]
    fn el_curve_examples() {
        let grid = [10, 11, 100, 101, 1000];
        for (n, ratio) in el_ratio_curve(2, &grid, ExactBudget::default()).unwrap() {
            assert!((ratio - 2.0 * (n / 2) as f64 / (n - 1) as f64).abs() < 1e-12);
        }
        for (_, ratio) in el_ratio_curve(1, &grid, ExactBudget::default()).unwrap() {
            assert_eq!(ratio, 1.0);
        }
        assert!(el_ratio_curve(2, &[10, 5], ExactBudget::default()).is_err());
    }

    #[test]
    fn shift_ratio_examples() {
        assert_eq!(binomial_shift_ratio(9, 1).unwrap(), 1.0);
        assert!((binomial_shift_ratio(7, 3).unwrap() - 2.4).abs() < 1e-12);
        assert!((binomial_shift_ratio(1_000_000, 10).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn transfer_examples() {
        let t = partition_threshold_transfer(6, 3, ExactBudget::default()).unwrap();
        assert_eq!(t.q_over_p, r(1, 3));
        assert_eq!(t.d_over_c, r(3, 5));
        assert_eq!(partition_threshold_transfer(9, 1, ExactBudget::default()).unwrap().as_f64(), (1.0, 1.0));
    }
}
