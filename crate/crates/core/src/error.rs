//! Error type shared across the library.
//!
//! Construction-time validation (primes, level specs, budgets) reports
//! through [`Error`]; arithmetic between values that were already validated
//! panics on misuse instead, since mixing moduli or scales is a programming
//! error rather than a runtime condition.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a supported prime (need a prime in 2..={max})", max = crate::field::MAX_PRIME)]
    NotPrime(u64),

    #[error("value {value} is not a residue mod {p}")]
    ValueOutOfRange { value: u64, p: u64 },

    #[error("scale {0} exceeds the supported maximum {max}", max = crate::field_group::MAX_SCALE)]
    ScaleTooLarge(u32),

    #[error("element at scale {have} is not constant on scale-{want} cylinders")]
    NotConstantOnCylinders { have: u32, want: u32 },

    #[error("invalid level spec: {0}")]
    InvalidSpec(String),

    #[error("level {level} is vacuous (margin {margin} forces empty cells at block scale {block_scale})")]
    VacuousLevel {
        level: usize,
        margin: u64,
        block_scale: u32,
    },

    #[error("work estimate {needed} exceeds budget {budget}; use a sampled mode instead")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("functional system is linearly dependent")]
    DependentSystem,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
