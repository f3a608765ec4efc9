//! Probability that a uniformly random object of each model has pairwise
//! distinct part sizes, exactly and in log space.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::counting::{
    compositions_count, distinct_compositions_count, distinct_fiber_surjections_count,
    distinct_partitions_count, log_count, partitions_count, surjections_count, CountFamily,
    ExactBudget,
};
use crate::error::{Error, Result};
use crate::numeric::{ratio_to_f64, LogReal};

/// The four surjective ways of putting `n` balls into `k` nonempty boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Identical balls, labelled boxes.
    Composition,
    /// Identical balls, unlabelled boxes.
    Partition,
    /// Labelled balls, labelled boxes.
    Surjection,
    /// Labelled balls, unlabelled boxes.
    SetPartition,
}

impl Model {
    pub const ALL: [Model; 4] = [
        Model::Composition,
        Model::Partition,
        Model::Surjection,
        Model::SetPartition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Composition => "composition",
            Model::Partition => "partition",
            Model::Surjection => "surjection",
            Model::SetPartition => "set_partition",
        }
    }

    /// Family counting all objects of this model.
    pub fn total_family(self) -> CountFamily {
        match self {
            Model::Composition => CountFamily::Composition,
            Model::Partition => CountFamily::Partition,
            Model::Surjection => CountFamily::Surjection,
            Model::SetPartition => CountFamily::SetPartition,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| Error::InvalidFamily(s.to_string()))
    }
}

/// Which numeric route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Exact,
    LogSpace,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Exact => "exact",
            Regime::LogSpace => "log",
        })
    }
}

/// Reduced ratio of big naturals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigRatio(Ratio<BigUint>);

impl BigRatio {
    pub fn new(numer: BigUint, denom: BigUint) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        BigRatio(Ratio::new(numer, denom))
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.numer(), self.denom())
    }

    pub fn is_zero(&self) -> bool {
        self.numer().is_zero()
    }

    pub fn as_ratio(&self) -> &Ratio<BigUint> {
        &self.0
    }
}

impl From<Ratio<BigUint>> for BigRatio {
    fn from(r: Ratio<BigUint>) -> Self {
        BigRatio(r)
    }
}

impl fmt::Display for BigRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

fn check_feasible(n: u64, k: u64) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::Infeasible { n, k })
    } else {
        Ok(())
    }
}

/// Exact `P(all part sizes distinct)` for a uniform object of `model`.
pub fn prob_all_distinct_exact(model: Model, n: u64, k: u64, budget: ExactBudget) -> Result<BigRatio> {
    check_feasible(n, k)?;
    let (num, den) = match model {
        Model::Composition => {
            budget.check(ExactBudget::table_cells(n, k))?;
            (distinct_compositions_count(n, k), compositions_count(n, k))
        }
        Model::Partition => {
            budget.check(ExactBudget::table_cells(n, k))?;
            (distinct_partitions_count(n, k), partitions_count(n, k))
        }
        // the k! in F = k! S cancels against the one in Fd
        Model::Surjection | Model::SetPartition => {
            budget.check(ExactBudget::distinct_fiber_cells(n, k))?;
            (distinct_fiber_surjections_count(n, k), surjections_count(n, k))
        }
    };
    Ok(BigRatio::new(num, den))
}

/// `P(all part sizes distinct)` from log-space counts.
pub fn prob_all_distinct_log(model: Model, n: u64, k: u64) -> Result<LogReal> {
    check_feasible(n, k)?;
    if n < k * (k + 1) / 2 {
        return Ok(LogReal::ZERO);
    }
    let (num, den) = match model {
        Model::Composition => (
            log_count(CountFamily::DistinctComposition, n, k),
            log_count(CountFamily::Composition, n, k),
        ),
        Model::Partition => (
            log_count(CountFamily::DistinctPartition, n, k),
            log_count(CountFamily::Partition, n, k),
        ),
        Model::Surjection | Model::SetPartition => (
            log_count(CountFamily::DistinctFiberSurjection, n, k),
            log_count(CountFamily::Surjection, n, k),
        ),
    };
    Ok(num / den)
}

/// A probability together with the route that produced it.
#[derive(Debug, Clone)]
pub struct ProbReport {
    pub model: Model,
    pub n: u64,
    pub k: u64,
    pub exact: Option<BigRatio>,
    pub value: f64,
    pub regime: Regime,
}

/// Exact when the budget allows, log space otherwise.
pub fn prob_all_distinct(model: Model, n: u64, k: u64, budget: ExactBudget) -> Result<ProbReport> {
    match prob_all_distinct_exact(model, n, k, budget) {
        Ok(r) => Ok(ProbReport {
            model,
            n,
            k,
            value: r.to_f64(),
            exact: Some(r),
            regime: Regime::Exact,
        }),
        Err(Error::RegimeExceeded { .. }) => {
            let lg = prob_all_distinct_log(model, n, k)?;
            Ok(ProbReport {
                model,
                n,
                k,
                exact: None,
                value: lg.value(),
                regime: Regime::LogSpace,
            })
        }
        Err(e) => Err(e),
    }
}
