//! Enumeration of functional systems.
//!
//! Functionals are indexed by their coefficient vectors in lexicographic
//! order, skipping zero. Systems of dimension `d` are enumerated as
//! ascending index tuples; dependent tuples are silently skipped, so the
//! yield is every independent `d`-subset exactly once.

use super::{Functional, FunctionalSystem};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::field_group::group_size;
use crate::GroupElement;
use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, Zero};

/// Number of nonzero functionals at the scale: `p^(2^scale) - 1`.
pub fn count_functionals(p: Prime, scale: u32) -> BigUint {
    BigUint::from(p.get()).pow(1u32 << scale) - 1u32
}

/// Exact number of independent `d`-subsets: ordered independent tuples
/// number `(q - 1)(q - p)...(q - p^(d-1))`, and each subset appears in
/// `d!` orders.
pub fn count_systems(p: Prime, scale: u32, d: usize) -> BigUint {
    let q = BigUint::from(p.get()).pow(1u32 << scale);
    let mut ordered = BigUint::one();
    let mut skip = BigUint::one();
    for _ in 0..d {
        if skip >= q {
            return BigUint::zero();
        }
        ordered *= &q - &skip;
        skip *= p.get();
    }
    let mut fact = BigUint::one();
    for i in 2..=d {
        fact *= BigUint::from(i);
    }
    ordered / fact
}

pub struct SystemIter {
    p: Prime,
    scale: u32,
    q: u64,
    indices: Vec<u64>,
    exhausted: bool,
}

/// Iterates every independent system of exactly `d` functionals. The
/// number of candidate tuples, `C(q-1, d)`, must fit the budget.
pub fn enumerate_systems(p: Prime, scale: u32, d: usize, budget: u64) -> Result<SystemIter> {
    if d == 0 {
        return Err(Error::InvalidSpec("system dimension must be at least 1".into()));
    }
    let work = binomial(count_functionals(p, scale), BigUint::from(d));
    if work > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { needed: work.to_string(), budget });
    }
    // The budget bound implies q - 1 fits in u64.
    let q = group_size(p, scale).expect("group size fits u64 under budget");
    Ok(SystemIter {
        p,
        scale,
        q,
        indices: (1..=d as u64).collect(),
        exhausted: (d as u64) > q - 1,
    })
}

impl SystemIter {
    fn advance(&mut self) {
        let d = self.indices.len();
        let mut i = d;
        loop {
            if i == 0 {
                self.exhausted = true;
                return;
            }
            i -= 1;
            if self.indices[i] < self.q - 1 - (d - 1 - i) as u64 {
                self.indices[i] += 1;
                for j in i + 1..d {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                return;
            }
        }
    }
}

impl Iterator for SystemIter {
    type Item = FunctionalSystem;

    fn next(&mut self) -> Option<FunctionalSystem> {
        loop {
            if self.exhausted {
                return None;
            }
            let functionals: Vec<Functional> = self
                .indices
                .iter()
                .map(|&i| {
                    Functional::new(
                        GroupElement::from_index(self.p, self.scale, i).expect("index in range"),
                    )
                })
                .collect();
            self.advance();
            if let Ok(sys) = FunctionalSystem::new(functionals) {
                return Some(sys);
            }
        }
    }
}
