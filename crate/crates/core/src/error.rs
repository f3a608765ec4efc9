use thiserror::Error;

/// Errors produced by the counting, probability and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("infeasible input: n = {n}, k = {k}")]
    Infeasible { n: u64, k: u64 },

    #[error("exact regime exceeded: {needed} cells needed, budget is {budget}")]
    RegimeExceeded { needed: u128, budget: u64 },

    #[error("unknown family or model tag `{0}`")]
    InvalidFamily(String),

    #[error("cluster profile is empty")]
    EmptyProfile,

    #[error("sequence is identically zero")]
    AllZeroSequence,

    #[error("no crossing of p_target = {p_target} for n = {n} on k in [{k_lo}, {k_hi}]")]
    NoCrossing {
        n: u64,
        p_target: f64,
        k_lo: u64,
        k_hi: u64,
    },

    #[error("monotonicity violated at n = {n}: P(k = {k_a}) = {p_a:.5}, P(k = {k_b}) = {p_b:.5}")]
    MonotonicityViolation {
        n: u64,
        k_a: u64,
        p_a: f64,
        k_b: u64,
        p_b: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
