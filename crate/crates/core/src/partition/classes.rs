//! Translation classes of residue subsets.
//!
//! The proper nonempty subsets of the residues mod `p` fall into
//! `(2^p - 2)/p` orbits under translation, each of size exactly `p` (a
//! translate of `S` equals `S` only when the translation is by 0, since a
//! nontrivial stabilizer would be all of the cyclic group and force `S`
//! empty or full). Picking the member with the smallest bitmask as the
//! orbit representative and assigning its translate by `x` to class `x`
//! yields classes `S_0, ..., S_{p-1}` with:
//!
//! - equivariance: translating every member of class `x` by `y` gives
//!   exactly class `x+y`;
//! - the singleton rule: `{x}` lands in class `x`;
//! - each class holding one member per orbit, so all classes have size
//!   `(2^p - 2)/p`.
//!
//! Any other equivariant representative choice works equally well; the
//! minimal-bitmask rule is fixed so counts and labels are reproducible.

use crate::field::{FieldSubset, Prime};

const UNASSIGNED: u8 = u8::MAX;

/// The `p` translation classes of proper nonempty residue subsets.
#[derive(Clone, Debug)]
pub struct SubsetClassFamily {
    p: Prime,
    classes: Vec<Vec<FieldSubset>>,
    class_of: Vec<u8>,
}

impl SubsetClassFamily {
    pub fn new(p: Prime) -> SubsetClassFamily {
        let pp = p.get() as usize;
        let full = (1u32 << pp) - 1;
        let mut classes = vec![Vec::new(); pp];
        let mut class_of = vec![UNASSIGNED; 1 << pp];
        // Ascending scan: the first unassigned subset of an orbit is its
        // minimal-bitmask representative.
        for mask in 1..full {
            if class_of[mask as usize] != UNASSIGNED {
                continue;
            }
            let rep = FieldSubset::from_mask(p, mask);
            for x in 0..pp as u8 {
                let member = rep.translate(x);
                debug_assert_eq!(class_of[member.mask() as usize], UNASSIGNED);
                class_of[member.mask() as usize] = x;
                classes[usize::from(x)].push(member);
            }
        }
        SubsetClassFamily {
            p,
            classes,
            class_of,
        }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Members of class `x`, ordered by representative.
    #[inline]
    pub fn class(&self, x: u8) -> &[FieldSubset] {
        &self.classes[usize::from(x)]
    }

    /// The class containing `s`; `None` for the empty and full subsets.
    #[inline]
    pub fn class_of(&self, s: FieldSubset) -> Option<u8> {
        self.class_of_mask(s.mask())
    }

    #[inline]
    pub fn class_of_mask(&self, mask: u32) -> Option<u8> {
        match self.class_of[mask as usize] {
            UNASSIGNED => None,
            x => Some(x),
        }
    }

    /// `(2^p - 2)/p`, the number of orbits.
    pub fn class_size(&self) -> u64 {
        ((1u64 << self.p.get()) - 2) / self.p.get()
    }
}
