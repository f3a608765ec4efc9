//! Locating the critical number of boxes `k_c(n)` at which
//! `P(some two parts equal)` crosses a target, and fitting the growth
//! exponent of `k_c` in `n`.
//!
//! Compositions and the two labelled-ball models are probed by Monte
//! Carlo; partitions use the exact log-space ratio `q(n, k) / p(n, k)`.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::counting::{ExactBudget, PartitionSweep};
use crate::error::{Error, Result};
use crate::probability::Model;
use crate::samplers::{all_distinct_in_place, RngSpec, Sampler};

/// Samples drawn per random stream chunk. Fixed so that results do not
/// depend on how many threads run the chunks.
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// Fraction of samples with pairwise distinct parts.
    pub p_hat: f64,
    pub samples: u64,
    pub std_err: f64,
    pub rng: RngSpec,
}

impl McEstimate {
    fn from_counts(successes: u64, samples: u64, rng: RngSpec) -> Self {
        let p_hat = successes as f64 / samples as f64;
        McEstimate {
            p_hat,
            samples,
            std_err: (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
            rng,
        }
    }

    /// Estimated `P(some two parts equal)`.
    pub fn p_equal(&self) -> f64 {
        1.0 - self.p_hat
    }
}

fn count_distinct(sampler: &Sampler, samples: u64, rng: RngSpec) -> u64 {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.substream(c).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            let mut buf = Vec::new();
            (0..len)
                .filter(|_| {
                    sampler.sample_into(&mut r, &mut buf);
                    all_distinct_in_place(&mut buf)
                })
                .count() as u64
        })
        .sum()
}

/// Monte Carlo estimate of `P(all parts distinct)`.
pub fn estimate_p_distinct(
    model: Model,
    n: u64,
    k: u64,
    samples: u64,
    rng: RngSpec,
    budget: ExactBudget,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let sampler = Sampler::new(model, n, k, budget)?;
    Ok(McEstimate::from_counts(count_distinct(&sampler, samples, rng), samples, rng))
}

/// Largest `k` with `binom(k + 1, 2) <= n`.
pub fn max_distinct_k(n: u64) -> u64 {
    let mut k = ((((8 * n as u128 + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
    while (k + 1) * (k + 2) / 2 <= n {
        k += 1;
    }
    while k * (k + 1) / 2 > n {
        k -= 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdConfig {
    pub p_target: f64,
    pub probe_samples: u64,
    pub confirm_samples: u64,
    pub budget: ExactBudget,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            p_target: 0.5,
            probe_samples: 10_000,
            confirm_samples: 100_000,
            budget: ExactBudget::default(),
        }
    }
}

/// Located crossing. Probabilities are of the event "some two parts equal".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KcResult {
    pub model: Model,
    pub n: u64,
    pub k_c: u64,
    pub p_at: f64,
    pub p_below: f64,
    pub std_err: f64,
    pub std_err_below: f64,
    /// Samples per confirmation estimate; 0 for exact evaluation.
    pub samples: u64,
    /// Either confirmation estimate lies within 2 standard errors of the
    /// target.
    pub ambiguous: bool,
    pub rng: RngSpec,
}

impl KcResult {
    pub const CSV_HEADER: &'static str = "model,n,k_c,p_hat,std_err,samples,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{},{}",
            self.model, self.n, self.k_c, self.p_at, self.std_err, self.samples, self.rng.seed
        )
    }
}

struct Probe {
    k: u64,
    p_equal: f64,
    std_err: f64,
}

struct Prober<'a> {
    model: Model,
    n: u64,
    cfg: &'a ThresholdConfig,
    rng: RngSpec,
    seen: Vec<Probe>,
}

impl Prober<'_> {
    fn estimate(&mut self, k: u64, samples: u64, phase: u64) -> Result<McEstimate> {
        let spec = self.rng.substream((phase << 40) | k);
        let est = estimate_p_distinct(self.model, self.n, k, samples, spec, self.cfg.budget)?;
        let probe = Probe {
            k,
            p_equal: est.p_equal(),
            std_err: est.std_err,
        };
        // P(some equal) should not decrease in k; flag drops beyond 3 sigma
        for other in &self.seen {
            let (lo, hi) = if other.k < probe.k { (other, &probe) } else { (&probe, other) };
            let tol = 3.0 * (lo.std_err.powi(2) + hi.std_err.powi(2)).sqrt();
            if lo.k < hi.k && lo.p_equal - hi.p_equal > tol.max(1e-12) {
                return Err(Error::MonotonicityViolation {
                    n: self.n,
                    k_a: lo.k,
                    p_a: lo.p_equal,
                    k_b: hi.k,
                    p_b: hi.p_equal,
                });
            }
        }
        self.seen.push(probe);
        Ok(est)
    }
}

/// Smallest `k >= 2` whose probability of a repeated part size reaches
/// `cfg.p_target`, searched over `2..=max_distinct_k(n)`.
pub fn find_kc(model: Model, n: u64, cfg: &ThresholdConfig, rng: RngSpec) -> Result<KcResult> {
    if !(cfg.p_target > 0.0 && cfg.p_target < 1.0) {
        return Err(Error::InvalidInput("p_target must lie in (0, 1)".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput("n must be at least 3".into()));
    }
    if model == Model::Partition {
        return find_kc_partition(n, cfg.p_target, rng);
    }
    let target = cfg.p_target;
    let k_hi = max_distinct_k(n);
    let no_crossing = || Error::NoCrossing {
        n,
        p_target: target,
        k_lo: 2,
        k_hi,
    };
    let mut prober = Prober {
        model,
        n,
        cfg,
        rng,
        seen: Vec::new(),
    };
    if prober.estimate(2, cfg.probe_samples, 0)?.p_equal() >= target {
        return Err(no_crossing());
    }
    if k_hi == 2 || prober.estimate(k_hi, cfg.probe_samples, 0)?.p_equal() < target {
        return Err(no_crossing());
    }
    let (mut lo, mut hi) = (2, k_hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if prober.estimate(mid, cfg.probe_samples, 0)?.p_equal() >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // confirm with larger samples, stepping if the probes were misled
    let mut k = hi;
    let mut at = prober.estimate(k, cfg.confirm_samples, 1)?;
    let mut below = prober.estimate(k - 1, cfg.confirm_samples, 1)?;
    for _ in 0..8 {
        if at.p_equal() < target && k < k_hi {
            k += 1;
            below = at;
            at = prober.estimate(k, cfg.confirm_samples, 1)?;
        } else if below.p_equal() >= target && k > 3 {
            k -= 1;
            at = below;
            below = prober.estimate(k - 1, cfg.confirm_samples, 1)?;
        } else {
            break;
        }
    }
    let near = |e: &McEstimate| (e.p_equal() - target).abs() <= 2.0 * e.std_err;
    let consistent = at.p_equal() >= target && below.p_equal() < target;
    Ok(KcResult {
        model,
        n,
        k_c: k,
        p_at: at.p_equal(),
        p_below: below.p_equal(),
        std_err: at.std_err,
        std_err_below: below.std_err,
        samples: cfg.confirm_samples,
        ambiguous: !consistent || near(&at) || near(&below),
        rng,
    })
}

/// Exact crossing for partitions from `1 - q(n, k) / p(n, k)`.
fn find_kc_partition(n: u64, target: f64, rng: RngSpec) -> Result<KcResult> {
    let k_hi = max_distinct_k(n);
    let mut prev = 0.0;
    for stage in PartitionSweep::new(n).take(k_hi as usize) {
        let p_equal = 1.0 - stage.distinct_ratio();
        if stage.k >= 2 && p_equal >= target {
            if stage.k == 2 {
                break;
            }
            return Ok(KcResult {
                model: Model::Partition,
                n,
                k_c: stage.k,
                p_at: p_equal,
                p_below: prev,
                std_err: 0.0,
                std_err_below: 0.0,
                samples: 0,
                ambiguous: false,
                rng,
            });
        }
        prev = p_equal;
    }
    Err(Error::NoCrossing {
        n,
        p_target: target,
        k_lo: 2,
        k_hi,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdFit {
    pub model: Model,
    pub points: Vec<(u64, u64)>,
    pub slope: f64,
    pub intercept: f64,
    /// 95% interval for the slope; absent with fewer than 3 points.
    pub slope_ci: Option<(f64, f64)>,
    #[serde(skip)]
    pub results: Vec<KcResult>,
}

/// Ordinary least squares `y = intercept + slope x` with a 95% Student-t
/// interval on the slope.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, Option<(f64, f64)>)> {
    let m = xs.len();
    if m < 2 || ys.len() != m {
        return Err(Error::InvalidInput("need at least two points".into()));
    }
    let mf = m as f64;
    let xbar = xs.iter().sum::<f64>() / mf;
    let ybar = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("x values are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ci = (m > 2).then(|| {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let se = (rss / (mf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, mf - 2.0)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        (slope - t * se, slope + t * se)
    });
    Ok((slope, intercept, ci))
}

/// `k_c` at each grid point, then the OLS slope of `ln k_c` on `ln n`.
pub fn fit_exponent(model: Model, n_grid: &[u64], cfg: &ThresholdConfig, rng: RngSpec) -> Result<ThresholdFit> {
    let (lo, hi) = match (n_grid.iter().min(), n_grid.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::InvalidInput("empty n grid".into())),
    };
    if (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::InvalidInput("n grid must span at least two decades".into()));
    }
    let results = n_grid
        .par_iter()
        .map(|&n| find_kc(model, n, cfg, rng.substream(n)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = results.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = results.iter().map(|r| (r.k_c as f64).ln()).collect();
    let (slope, intercept, slope_ci) = ols(&xs, &ys)?;
    Ok(ThresholdFit {
        model,
        points: results.iter().map(|r| (r.n, r.k_c)).collect(),
        slope,
        intercept,
        slope_ci,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::prob_all_distinct;

    #[test]
    fn trivial_estimates() {
        let b = ExactBudget::default();
        let spec = RngSpec::new(7, 0);
        let e = estimate_p_distinct(Model::Composition, 5, 3, 5000, spec, b).unwrap();
        assert_eq!(e.p_hat, 0.0);
        let e = estimate_p_distinct(Model::Surjection, 3, 2, 100_000, spec, b).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert!(estimate_p_distinct(Model::Composition, 3, 4, 10, spec, b).is_err());
    }

    #[test]
    fn estimate_within_four_sigma() {
        let b = ExactBudget::default();
        let e = estimate_p_distinct(Model::Composition, 30, 3, 100_000, RngSpec::new(11, 2), b).unwrap();
        let exact = prob_all_distinct(Model::Composition, 30, 3, b).unwrap().value;
        assert!((e.p_hat - exact).abs() <= 4.0 * e.std_err, "{} vs {exact}", e.p_hat);
        assert!((e.std_err - (e.p_hat * (1.0 - e.p_hat) / 1e5).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn estimates_are_deterministic() {
        let b = ExactBudget::default();
        let spec = RngSpec::new(3, 9);
        let a = estimate_p_distinct(Model::Surjection, 200, 6, 10_000, spec, b).unwrap();
        let c = estimate_p_distinct(Model::Surjection, 200, 6, 10_000, spec, b).unwrap();
        assert_eq!(a, c);
        let s = estimate_p_distinct(Model::SetPartition, 200, 6, 10_000, spec, b).unwrap();
        assert_eq!(a.p_hat, s.p_hat);
    }

    #[test]
    fn max_k_range() {
        assert_eq!(max_distinct_k(3), 2);
        assert_eq!(max_distinct_k(5), 2);
        assert_eq!(max_distinct_k(6), 3);
        assert_eq!(max_distinct_k(10_000_000), 4471);
    }

    #[test]
    fn boundary_n_three() {
        let cfg = ThresholdConfig::default();
        for m in Model::ALL {
            match find_kc(m, 3, &cfg, RngSpec::new(1, 0)) {
                Ok(r) => assert_eq!(r.k_c, 2),
                Err(Error::NoCrossing { .. }) => {}
                Err(e) => panic!("{m}: {e}"),
            }
        }
    }

    #[test]
    fn crossing_is_self_consistent() {
        let cfg = ThresholdConfig::default();
        let r = find_kc(Model::Composition, 20_000, &cfg, RngSpec::new(5, 0)).unwrap();
        assert!(r.ambiguous || (r.p_at >= 0.5 && r.p_below < 0.5));
        assert!(r.p_at >= 0.5 - 2.0 * r.std_err);
    }

    #[test]
    fn partition_crossing_is_exact() {
        let n = 2000;
        let r = find_kc(Model::Partition, n, &ThresholdConfig::default(), RngSpec::new(0, 0)).unwrap();
        let b = ExactBudget::default();
        let at = prob_all_distinct(Model::Partition, n, r.k_c, b).unwrap().value;
        let below = prob_all_distinct(Model::Partition, n, r.k_c - 1, b).unwrap().value;
        assert!(1.0 - at >= 0.5 && 1.0 - below < 0.5);
    }

    #[test]
    fn ols_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.5, 2.0, 2.5, 3.0];
        let (s, i, ci) = ols(&xs, &ys).unwrap();
        assert!((s - 0.5).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
        let (lo, hi) = ci.unwrap();
        assert!(lo <= s && s <= hi);
        assert!(ols(&xs[..2], &ys[..2]).unwrap().2.is_none());
    }
}
