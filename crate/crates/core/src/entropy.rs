//! Label entropy `H[X]` and class-size entropy `H[m]` of an observed cluster
//! profile, in nats.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::samplers::has_distinct_parts;

/// Multiset of positive class sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterProfile {
    sizes: Vec<u64>,
    n: u64,
}

impl ClusterProfile {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidInput("class sizes must be positive".into()));
        }
        let n = sizes.iter().sum();
        Ok(ClusterProfile { sizes, n })
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn has_distinct_sizes(&self) -> bool {
        has_distinct_parts(&self.sizes)
    }
}

impl FromStr for ClusterProfile {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let sizes = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|e| Error::InvalidInput(format!("bad size {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ClusterProfile::new(sizes)
    }
}

/// One profile per nonblank line; `#` starts a comment line.
pub fn parse_profiles(text: &str) -> Result<Vec<ClusterProfile>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.parse().map_err(|e: Error| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

fn plogp_sum(weights: impl Iterator<Item = u64>, n: u64) -> f64 {
    let n = n as f64;
    let h: f64 = weights
        .map(|w| {
            let p = w as f64 / n;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

/// `H[X] = -sum_i (m_i / n) ln(m_i / n)`.
pub fn label_entropy(profile: &ClusterProfile) -> f64 {
    plogp_sum(profile.sizes.iter().copied(), profile.n)
}

/// Entropy of the size of the class containing a uniform element:
/// `-sum_s (s c_s / n) ln(s c_s / n)` with `c_s` classes of size `s`.
pub fn size_entropy(profile: &ClusterProfile) -> f64 {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &s in &profile.sizes {
        *counts.entry(s).or_default() += 1;
    }
    plogp_sum(counts.into_iter().map(|(s, c)| s * c), profile.n)
}

/// `H[X] - H[m]`, zero exactly when all sizes differ.
pub fn dpi_gap(profile: &ClusterProfile) -> f64 {
    if profile.has_distinct_sizes() {
        return 0.0;
    }
    (label_entropy(profile) - size_entropy(profile)).max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub n: u64,
    pub k: usize,
    pub label_entropy: f64,
    pub size_entropy: f64,
    pub dpi_gap: f64,
}

impl EntropyReport {
    pub const CSV_HEADER: &'static str =
        "n,k,label_entropy_nats,size_entropy_nats,dpi_gap_nats,label_entropy_bits,size_entropy_bits,dpi_gap_bits";

    pub fn csv_row(&self) -> String {
        let b = std::f64::consts::LN_2;
        format!(
            "{},{},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12}",
            self.n,
            self.k,
            self.label_entropy,
            self.size_entropy,
            self.dpi_gap,
            self.label_entropy / b,
            self.size_entropy / b,
            self.dpi_gap / b
        )
    }
}

pub fn entropy_report(profile: &ClusterProfile) -> EntropyReport {
    EntropyReport {
        n: profile.n,
        k: profile.k(),
        label_entropy: label_entropy(profile),
        size_entropy: size_entropy(profile),
        dpi_gap: dpi_gap(profile),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn prof(s: &[u64]) -> ClusterProfile {
        ClusterProfile::new(s.to_vec()).unwrap()
    }

    #[test]
    fn label_entropy_examples() {
        assert!((label_entropy(&prof(&[1, 1, 1, 1])) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(label_entropy(&prof(&[4])), 0.0);
        assert!((label_entropy(&prof(&[1, 3])) - 0.562_335_144_618_808_5).abs() < 1e-12);
    }

    #[test]
    fn size_entropy_examples() {
        assert_eq!(size_entropy(&prof(&[2, 2])), 0.0);
        assert_eq!(size_entropy(&prof(&[1, 3])), label_entropy(&prof(&[1, 3])));
        let p = prof(&[1, 1, 2]);
        assert!((size_entropy(&p) - LN_2).abs() < 1e-12);
        assert!((label_entropy(&p) - (4f64.ln() - 0.5 * LN_2)).abs() < 1e-12);
    }

    #[test]
    fn gap_examples() {
        assert_eq!(dpi_gap(&prof(&[1, 2, 5])), 0.0);
        assert!((dpi_gap(&prof(&[2, 2])) - LN_2).abs() < 1e-12);
    }

    #[test]
    fn parsing() {
        let ps = parse_profiles("1 2 3\n\n# note\n4  4\n").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[1].sizes(), &[4, 4]);
        assert!(matches!(parse_profiles("1 x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_profiles("1\n0 2"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(ClusterProfile::new(vec![]), Err(Error::EmptyProfile));
    }
}
