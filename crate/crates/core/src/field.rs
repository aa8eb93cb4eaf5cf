//! Scalars: validated prime moduli, residues, and subsets of residues.
//!
//! Everything downstream fixes one prime `p` and works with residues
//! `0..p`. `Prime` is validated once at the boundary; `FieldValue` keeps the
//! `value < p` invariant so arithmetic never needs to re-check. Subsets of
//! residues are bitmasks, which keeps translation and orbit computations
//! branch-free.

use crate::error::{Error, Result};
use std::fmt;

/// Largest supported modulus. The residue-subset machinery tabulates all
/// `2^p` subsets, so this stays small by design.
pub const MAX_PRIME: u64 = 19;

/// A validated prime modulus in `2..=MAX_PRIME`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Prime(u8);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        let small_primes = [2u64, 3, 5, 7, 11, 13, 17, 19];
        if small_primes.contains(&p) {
            Ok(Prime(p as u8))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        u64::from(self.0)
    }

    #[inline]
    pub fn as_u8(self) -> u8 {
        self.0
    }

    /// Bits used per digit in packed storage. Widths are padded to a power
    /// of two so a digit never straddles a limb boundary.
    #[inline]
    pub fn digit_bits(self) -> u32 {
        match self.0 {
            2 => 1,
            3 => 2,
            5 | 7 | 11 | 13 => 4,
            _ => 8,
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue mod `p`. Invariant: `value < p`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldValue {
    p: Prime,
    value: u8,
}

// Inherent by-value add/sub/neg/mul: the std ops traits would force a fixed
// modulus into the type or panic in `Add::add`; keeping them inherent makes the
// runtime modulus check explicit at each call site.
#[allow(clippy::should_implement_trait)]
impl FieldValue {
    pub fn new(p: Prime, value: u64) -> Result<FieldValue> {
        if value < p.get() {
            Ok(FieldValue {
                p,
                value: value as u8,
            })
        } else {
            Err(Error::ValueOutOfRange { value, p: p.get() })
        }
    }

    /// Reduces an arbitrary integer mod `p`.
    pub fn reduce(p: Prime, value: u64) -> FieldValue {
        FieldValue {
            p,
            value: (value % p.get()) as u8,
        }
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.value
    }

    #[inline]
    pub fn prime(self) -> Prime {
        self.p
    }

    pub fn add(self, other: FieldValue) -> FieldValue {
        assert_eq!(self.p, other.p, "mismatched moduli");
        FieldValue {
            p: self.p,
            value: add_mod(self.value, other.value, self.p.as_u8()),
        }
    }

    pub fn neg(self) -> FieldValue {
        FieldValue {
            p: self.p,
            value: neg_mod(self.value, self.p.as_u8()),
        }
    }

    pub fn sub(self, other: FieldValue) -> FieldValue {
        self.add(other.neg())
    }

    pub fn mul(self, other: FieldValue) -> FieldValue {
        assert_eq!(self.p, other.p, "mismatched moduli");
        FieldValue {
            p: self.p,
            value: ((u64::from(self.value) * u64::from(other.value)) % self.p.get()) as u8,
        }
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[inline]
pub(crate) fn add_mod(a: u8, b: u8, p: u8) -> u8 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub(crate) fn neg_mod(a: u8, p: u8) -> u8 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

/// A subset of the residues `0..p`, stored as a bitmask (bit `x` set iff
/// `x` is a member).
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldSubset {
    p: Prime,
    mask: u32,
}

impl FieldSubset {
    pub fn empty(p: Prime) -> FieldSubset {
        FieldSubset { p, mask: 0 }
    }

    pub fn full(p: Prime) -> FieldSubset {
        FieldSubset {
            p,
            mask: full_mask(p),
        }
    }

    pub fn from_mask(p: Prime, mask: u32) -> FieldSubset {
        assert_eq!(mask & !full_mask(p), 0, "mask has bits outside 0..p");
        FieldSubset { p, mask }
    }

    pub fn from_members<I: IntoIterator<Item = u64>>(p: Prime, members: I) -> Result<FieldSubset> {
        let mut mask = 0u32;
        for x in members {
            if x >= p.get() {
                return Err(Error::ValueOutOfRange { value: x, p: p.get() });
            }
            mask |= 1 << x;
        }
        Ok(FieldSubset { p, mask })
    }

    pub fn singleton(x: FieldValue) -> FieldSubset {
        FieldSubset {
            p: x.prime(),
            mask: 1 << x.value(),
        }
    }

    #[inline]
    pub fn prime(self) -> Prime {
        self.p
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.mask
    }

    #[inline]
    pub fn contains(self, x: u8) -> bool {
        debug_assert!(u64::from(x) < self.p.get());
        self.mask & (1 << x) != 0
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.mask.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn is_full(self) -> bool {
        self.mask == full_mask(self.p)
    }

    /// True for subsets that are neither empty nor all of the residues.
    #[inline]
    pub fn is_proper_nonempty(self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    /// The translate `{ s + y : s in self }`.
    pub fn translate(self, y: u8) -> FieldSubset {
        let p = self.p.as_u8();
        debug_assert!(y < p);
        let mut mask = 0u32;
        for x in 0..p {
            if self.contains(x) {
                mask |= 1 << add_mod(x, y, p);
            }
        }
        FieldSubset { p: self.p, mask }
    }

    pub fn complement(self) -> FieldSubset {
        FieldSubset {
            p: self.p,
            mask: full_mask(self.p) & !self.mask,
        }
    }

    pub fn union(self, other: FieldSubset) -> FieldSubset {
        assert_eq!(self.p, other.p, "mismatched moduli");
        FieldSubset {
            p: self.p,
            mask: self.mask | other.mask,
        }
    }

    pub fn intersect(self, other: FieldSubset) -> FieldSubset {
        assert_eq!(self.p, other.p, "mismatched moduli");
        FieldSubset {
            p: self.p,
            mask: self.mask & other.mask,
        }
    }

    pub fn iter(self) -> impl Iterator<Item = u8> {
        let p = self.p.as_u8();
        let mask = self.mask;
        (0..p).filter(move |x| mask & (1 << x) != 0)
    }
}

#[inline]
fn full_mask(p: Prime) -> u32 {
    (1u32 << p.get()) - 1
}

impl fmt::Display for FieldSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for x in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        write!(f, "}}")
    }
}
