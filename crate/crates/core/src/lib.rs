//! Counting, sampling and asymptotic checks for the event that all parts
//! of a random composition, partition, surjection or set partition have
//! pairwise distinct sizes.

pub mod asymptotics;
pub mod counting;
pub mod entropy;
pub mod error;
pub mod moments;
pub mod numeric;
pub mod oracle;
pub mod probability;
pub mod samplers;
pub mod threshold;
pub mod verify;

pub use asymptotics::{
    binomial_shift_ratio, el_ratio_curve, gupta_sandwich, partition_threshold_transfer, SandwichReport,
    TransferReport,
};
pub use counting::{log_count, CountFamily, CountTable, ExactBudget, TableKind};
pub use entropy::{dpi_gap, label_entropy, size_entropy, ClusterProfile};
pub use error::{Error, Result};
pub use moments::{
    chung_erdos_lower_bound, claim1_ratio, composition_first_moment, composition_pair_terms, moment_report,
    surjection_first_moment, surjection_pair_terms, MomentReport, PairTerms,
};
pub use numeric::LogReal;
pub use probability::{prob_all_distinct, prob_all_distinct_exact, prob_all_distinct_log, BigRatio, Model, Regime};
pub use samplers::{has_distinct_parts, PartsVector, RngSpec, Sampler, SurjectionStrategy};
pub use threshold::{estimate_p_distinct, find_kc, fit_exponent, KcResult, McEstimate, ThresholdConfig, ThresholdFit};
