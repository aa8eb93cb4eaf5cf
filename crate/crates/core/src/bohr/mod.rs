//! Linear functionals and coset coverage questions.
//!
//! A functional pairs the group with its prime field through a digit-wise
//! dot product. Any `d` linearly independent functionals slice the group
//! into `p^d` cosets of a codimension-`d` subgroup, and those cosets are
//! exactly the basic closed neighborhoods the group's character topology
//! can resolve. The routines here answer coverage questions about them:
//! whether a set meets every coset up to a given codimension
//! ([`dense_upto`]), whether it contains one outright
//! ([`contains_coset`]), and whether small Hamming balls already reach
//! every coset pattern ([`verify_hamming_generation`]).

mod density;
mod generation;
mod systems;

pub use density::{contains_coset, dense_upto, DensityReport};
pub use generation::{verify_hamming_generation, GenerationReport};
pub use systems::{count_functionals, count_systems, enumerate_systems, SystemIter};

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::GroupElement;
use std::fmt;

/// A linear map from the group at one scale to its prime field,
/// represented by its coefficient vector: `f(g) = sum_t c_t * g_t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Functional {
    coeffs: GroupElement,
}

impl Functional {
    pub fn new(coeffs: GroupElement) -> Functional {
        Functional { coeffs }
    }

    pub fn coeffs(&self) -> &GroupElement {
        &self.coeffs
    }

    pub fn prime(&self) -> Prime {
        self.coeffs.prime()
    }

    pub fn scale(&self) -> u32 {
        self.coeffs.scale()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.weight() == 0
    }

    /// Applies the functional. Arguments at a coarser scale are embedded
    /// first; a finer scale is a caller error.
    pub fn eval(&self, g: &GroupElement) -> u8 {
        let p = self.prime();
        assert_eq!(g.prime(), p, "mismatched primes");
        assert!(g.scale() <= self.scale(), "argument is finer than the functional");
        if p.get() == 2 && self.scale() <= 6 {
            let gb = if g.scale() == self.scale() {
                g.p2_bits()
            } else {
                g.embed(self.scale()).p2_bits()
            };
            return ((self.coeffs.p2_bits() & gb).count_ones() & 1) as u8;
        }
        let embedded;
        let g = if g.scale() == self.scale() {
            g
        } else {
            embedded = g.embed(self.scale());
            &embedded
        };
        let mut acc: u64 = 0;
        for t in 0..self.coeffs.len() {
            acc += u64::from(self.coeffs.digit(t)) * u64::from(g.digit(t));
            // Headroom check: products stay far below u64 overflow.
            if acc >= u64::MAX / 2 {
                acc %= p.get();
            }
        }
        (acc % p.get()) as u8
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.coeffs)
    }
}

/// A linearly independent family of functionals at one prime and scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalSystem {
    functionals: Vec<Functional>,
}

impl FunctionalSystem {
    /// Validates that the functionals agree on prime and scale and are
    /// linearly independent over the field.
    pub fn new(functionals: Vec<Functional>) -> Result<FunctionalSystem> {
        if functionals.is_empty() {
            return Err(Error::InvalidSpec("a functional system needs at least one functional".into()));
        }
        let p = functionals[0].prime();
        let scale = functionals[0].scale();
        for f in &functionals {
            if f.prime() != p || f.scale() != scale {
                return Err(Error::InvalidSpec(
                    "functionals must share one prime and scale".into(),
                ));
            }
        }
        let rows: Vec<Vec<u8>> = functionals.iter().map(|f| f.coeffs.to_digits()).collect();
        if rank(p, rows) < functionals.len() {
            return Err(Error::DependentSystem);
        }
        Ok(FunctionalSystem { functionals })
    }

    pub fn dimension(&self) -> usize {
        self.functionals.len()
    }

    pub fn prime(&self) -> Prime {
        self.functionals[0].prime()
    }

    pub fn scale(&self) -> u32 {
        self.functionals[0].scale()
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    /// The tuple of functional values at `g`, one per functional.
    pub fn pattern(&self, g: &GroupElement) -> Vec<u8> {
        self.functionals.iter().map(|f| f.eval(g)).collect()
    }

    /// The pattern encoded base `p`, first functional most significant.
    pub fn pattern_index(&self, g: &GroupElement) -> u64 {
        let p = self.prime().get();
        self.functionals
            .iter()
            .fold(0, |acc, f| acc * p + u64::from(f.eval(g)))
    }

    /// Number of distinct patterns, `p^d`.
    pub fn pattern_count(&self) -> u64 {
        self.prime().get().pow(self.dimension() as u32)
    }
}

impl fmt::Display for FunctionalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, func) in self.functionals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{func}")?;
        }
        write!(f, "]")
    }
}

/// Row rank over the prime field by Gaussian elimination.
pub(crate) fn rank(p: Prime, mut rows: Vec<Vec<u8>>) -> usize {
    let p64 = p.get();
    let inv = |a: u64| -> u64 {
        // p is tiny; scan for the inverse.
        (1..p64).find(|&b| a * b % p64 == 1).expect("nonzero residue")
    };
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let scale = inv(u64::from(rows[rank][col]));
        for x in rows[rank][col..].iter_mut() {
            *x = (u64::from(*x) * scale % p64) as u8;
        }
        let lead = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let factor = u64::from(row[col]);
                for (x, &l) in row[col..].iter_mut().zip(&lead[col..]) {
                    *x = ((u64::from(*x) + (p64 - factor % p64) * u64::from(l)) % p64) as u8;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
