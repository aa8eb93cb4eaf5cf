//! Elements of the scale-`n` group: digit vectors over F_p of length `2^n`.
//!
//! A scale-`n` element assigns a residue to each binary string of length
//! `n`. Strings are indexed by the integer they spell with the first
//! character most significant, so digit `t` corresponds to the string whose
//! bits are the binary expansion of `t`. A scale-`n` element embeds into
//! scale `N > n` by repeating every digit `2^(N-n)` times, which identifies
//! it with the function that ignores the extra trailing characters.
//!
//! Digits are stored packed, `digit_bits(p)` bits each (one bit for p = 2),
//! with unused high bits of the last limb kept zero so limb equality equals
//! digit equality. Addition for p = 2 is a straight XOR over limbs.

use crate::error::{Error, Result};
use crate::field::{add_mod, neg_mod, FieldSubset, FieldValue, Prime};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

/// Hard cap on the scale; `2^MAX_SCALE` digits per element.
pub const MAX_SCALE: u32 = 24;

/// A digit vector over F_p at an explicit scale.
#[derive(Clone, Debug)]
pub struct GroupElement {
    p: Prime,
    scale: u32,
    limbs: Vec<u64>,
}

impl GroupElement {
    /// The all-`x` element of the scale-`n` group.
    pub fn constant(scale: u32, x: FieldValue) -> Result<GroupElement> {
        check_scale(scale)?;
        let p = x.prime();
        let mut g = GroupElement::zero_unchecked(p, scale);
        if x.value() != 0 {
            let width = p.digit_bits();
            let mut pattern = 0u64;
            let mut ofs = 0;
            while ofs < 64 {
                pattern |= u64::from(x.value()) << ofs;
                ofs += width;
            }
            let n_digits = g.len();
            for (i, limb) in g.limbs.iter_mut().enumerate() {
                *limb = pattern;
                let digits_here = n_digits.saturating_sub(i as u64 * u64::from(64 / width));
                if digits_here < u64::from(64 / width) {
                    *limb &= tail_mask(digits_here as u32, width);
                }
            }
        }
        Ok(g)
    }

    /// The zero element.
    pub fn zero(p: Prime, scale: u32) -> Result<GroupElement> {
        check_scale(scale)?;
        Ok(GroupElement::zero_unchecked(p, scale))
    }

    fn zero_unchecked(p: Prime, scale: u32) -> GroupElement {
        let n_digits = 1u64 << scale;
        let per_limb = u64::from(64 / p.digit_bits());
        let n_limbs = n_digits.div_ceil(per_limb) as usize;
        GroupElement {
            p,
            scale,
            limbs: vec![0; n_limbs],
        }
    }

    /// Builds an element from unpacked digits; `digits.len()` must be `2^scale`.
    pub fn from_digits(p: Prime, scale: u32, digits: &[u8]) -> Result<GroupElement> {
        check_scale(scale)?;
        if digits.len() as u64 != 1u64 << scale {
            return Err(Error::InvalidSpec(format!(
                "expected {} digits, got {}",
                1u64 << scale,
                digits.len()
            )));
        }
        let mut g = GroupElement::zero_unchecked(p, scale);
        for (t, &d) in digits.iter().enumerate() {
            if u64::from(d) >= p.get() {
                return Err(Error::ValueOutOfRange {
                    value: u64::from(d),
                    p: p.get(),
                });
            }
            g.set_digit(t as u64, d);
        }
        Ok(g)
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Number of digits, `2^scale`.
    #[inline]
    pub fn len(&self) -> u64 {
        1u64 << self.scale
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn digit(&self, t: u64) -> u8 {
        debug_assert!(t < self.len());
        let width = self.p.digit_bits();
        let per_limb = u64::from(64 / width);
        let limb = self.limbs[(t / per_limb) as usize];
        let ofs = (t % per_limb) as u32 * width;
        ((limb >> ofs) & ((1u64 << width) - 1)) as u8
    }

    #[inline]
    fn set_digit(&mut self, t: u64, d: u8) {
        let width = self.p.digit_bits();
        let per_limb = u64::from(64 / width);
        let idx = (t / per_limb) as usize;
        let ofs = (t % per_limb) as u32 * width;
        let mask = ((1u64 << width) - 1) << ofs;
        self.limbs[idx] = (self.limbs[idx] & !mask) | (u64::from(d) << ofs);
    }

    /// Unpacks to one byte per digit.
    pub fn to_digits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() as usize);
        for t in 0..self.len() {
            out.push(self.digit(t));
        }
        out
    }

    /// For p = 2 at scale <= 6 all digits fit in the first limb, one bit each.
    #[inline]
    pub(crate) fn p2_bits(&self) -> u64 {
        debug_assert_eq!(self.p.get(), 2);
        debug_assert!(self.scale <= 6);
        self.limbs[0]
    }

    /// Counts digit positions holding a value in `values`.
    pub fn content_count(&self, values: FieldSubset) -> u64 {
        assert_eq!(self.p, values.prime(), "mismatched moduli");
        if self.p.get() == 2 {
            let ones: u64 = self.limbs.iter().map(|l| l.count_ones() as u64).sum();
            let mut total = 0;
            if values.contains(1) {
                total += ones;
            }
            if values.contains(0) {
                total += self.len() - ones;
            }
            return total;
        }
        let mut total = 0;
        for t in 0..self.len() {
            if values.contains(self.digit(t)) {
                total += 1;
            }
        }
        total
    }

    /// Number of nonzero digits.
    pub fn weight(&self) -> u64 {
        let zero_only = FieldSubset::from_mask(self.p, 1);
        self.len() - self.content_count(zero_only)
    }

    /// Re-expresses the element at a finer scale `N >= scale` by repeating
    /// each digit `2^(N-scale)` times. Panics if `N` is below the current
    /// scale or above `MAX_SCALE`.
    pub fn embed(&self, new_scale: u32) -> GroupElement {
        assert!(
            new_scale >= self.scale && new_scale <= MAX_SCALE,
            "embed target {new_scale} out of range for scale {}",
            self.scale
        );
        if new_scale == self.scale {
            return self.clone();
        }
        let reps = 1u64 << (new_scale - self.scale);
        let mut g = GroupElement::zero_unchecked(self.p, new_scale);
        for t in 0..self.len() {
            let d = self.digit(t);
            if d != 0 {
                for r in 0..reps {
                    g.set_digit(t * reps + r, d);
                }
            }
        }
        g
    }

    /// True when every block of `2^(scale-m)` consecutive digits is constant,
    /// i.e. the element is the embedding of a scale-`m` element.
    pub fn is_constant_on_cylinders(&self, m: u32) -> bool {
        if m >= self.scale {
            return true;
        }
        let block = 1u64 << (self.scale - m);
        for b in 0..(1u64 << m) {
            let first = self.digit(b * block);
            for s in 1..block {
                if self.digit(b * block + s) != first {
                    return false;
                }
            }
        }
        true
    }

    /// Inverse of `embed`: rewrites the element at the coarser scale `m` if
    /// it is constant on scale-`m` cylinders.
    pub fn compress(&self, m: u32) -> Result<GroupElement> {
        if m >= self.scale {
            return Ok(self.clone());
        }
        if !self.is_constant_on_cylinders(m) {
            return Err(Error::NotConstantOnCylinders {
                have: self.scale,
                want: m,
            });
        }
        let block = 1u64 << (self.scale - m);
        let mut g = GroupElement::zero_unchecked(self.p, m);
        for b in 0..(1u64 << m) {
            g.set_digit(b, self.digit(b * block));
        }
        Ok(g)
    }

    /// Smallest scale this element is constant on cylinders of.
    pub fn minimal_scale(&self) -> u32 {
        let mut n = self.scale;
        'outer: while n > 0 {
            let block = 1u64 << (self.scale - n + 1);
            for b in 0..(self.len() / block) {
                let first = self.digit(b * block);
                for s in 1..block {
                    if self.digit(b * block + s) != first {
                        break 'outer;
                    }
                }
            }
            n -= 1;
        }
        n
    }

    /// The restriction to the length-`m` prefix spelled by `prefix_index`:
    /// the scale-`(scale-m)` element reading digits
    /// `prefix_index * 2^(scale-m) ..`. Panics if `m > scale` or the index
    /// is out of range.
    pub fn restrict(&self, m: u32, prefix_index: u64) -> GroupElement {
        assert!(m <= self.scale, "restriction depth {m} exceeds scale");
        assert!(prefix_index < 1u64 << m, "prefix index out of range");
        let new_scale = self.scale - m;
        let block = 1u64 << new_scale;
        let mut g = GroupElement::zero_unchecked(self.p, new_scale);
        let base = prefix_index * block;
        for s in 0..block {
            g.set_digit(s, self.digit(base + s));
        }
        g
    }

    /// Adds the constant `y` to every digit.
    pub fn add_constant(&self, y: u8) -> GroupElement {
        debug_assert!(u64::from(y) < self.p.get());
        if y == 0 {
            return self.clone();
        }
        if self.p.get() == 2 {
            let mut g = self.clone();
            let n_digits = g.len();
            for (i, limb) in g.limbs.iter_mut().enumerate() {
                *limb = !*limb;
                let digits_here = n_digits.saturating_sub(i as u64 * 64);
                if digits_here < 64 {
                    *limb &= tail_mask(digits_here as u32, 1);
                }
            }
            return g;
        }
        let mut g = self.clone();
        let pp = self.p.as_u8();
        for t in 0..self.len() {
            g.set_digit(t, add_mod(self.digit(t), y, pp));
        }
        g
    }

    /// Multiplies every digit by `c`.
    pub fn scalar_mul(&self, c: FieldValue) -> GroupElement {
        assert_eq!(self.p, c.prime(), "mismatched moduli");
        match c.value() {
            0 => GroupElement::zero_unchecked(self.p, self.scale),
            1 => self.clone(),
            c => {
                let mut g = self.clone();
                let p = self.p.get();
                for t in 0..self.len() {
                    g.set_digit(t, ((u64::from(self.digit(t)) * u64::from(c)) % p) as u8);
                }
                g
            }
        }
    }

    /// Index of this element in the lexicographic enumeration of its scale,
    /// reading digits as a base-p integer, most significant first. `None`
    /// when the group size exceeds `u64`.
    pub fn index(&self) -> Option<u64> {
        let p = self.p.get();
        let mut acc: u64 = 0;
        for t in 0..self.len() {
            acc = acc.checked_mul(p)?.checked_add(u64::from(self.digit(t)))?;
        }
        Some(acc)
    }

    /// The element at `index` in the lexicographic enumeration.
    pub fn from_index(p: Prime, scale: u32, index: u64) -> Result<GroupElement> {
        check_scale(scale)?;
        let mut g = GroupElement::zero_unchecked(p, scale);
        let mut i = index;
        let pp = p.get();
        for t in (0..g.len()).rev() {
            g.set_digit(t, (i % pp) as u8);
            i /= pp;
        }
        if i != 0 {
            return Err(Error::InvalidSpec(format!(
                "index {index} out of range at scale {scale}"
            )));
        }
        Ok(g)
    }
}

fn check_scale(scale: u32) -> Result<()> {
    if scale > MAX_SCALE {
        Err(Error::ScaleTooLarge(scale))
    } else {
        Ok(())
    }
}

#[inline]
fn tail_mask(digits: u32, width: u32) -> u64 {
    let bits = digits * width;
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;

    fn add(self, rhs: &GroupElement) -> GroupElement {
        assert_eq!(self.p, rhs.p, "mismatched moduli");
        let scale = self.scale.max(rhs.scale);
        let (ea, eb);
        let (a, b) = if self.scale == rhs.scale {
            (self, rhs)
        } else {
            ea = self.embed(scale);
            eb = rhs.embed(scale);
            (&ea, &eb)
        };
        if self.p.get() == 2 {
            let mut g = a.clone();
            for (l, r) in g.limbs.iter_mut().zip(&b.limbs) {
                *l ^= r;
            }
            return g;
        }
        let mut g = GroupElement::zero_unchecked(self.p, scale);
        let pp = self.p.as_u8();
        for t in 0..g.len() {
            g.set_digit(t, add_mod(a.digit(t), b.digit(t), pp));
        }
        g
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;

    fn neg(self) -> GroupElement {
        if self.p.get() == 2 {
            return self.clone();
        }
        let mut g = self.clone();
        let pp = self.p.as_u8();
        for t in 0..self.len() {
            g.set_digit(t, neg_mod(self.digit(t), pp));
        }
        g
    }
}

impl Sub for &GroupElement {
    type Output = GroupElement;

    fn sub(self, rhs: &GroupElement) -> GroupElement {
        self + &(-rhs)
    }
}

/// Equality is modulo embedding: elements at different scales are equal
/// when one embeds to the other.
impl PartialEq for GroupElement {
    fn eq(&self, other: &GroupElement) -> bool {
        if self.p != other.p {
            return false;
        }
        if self.scale == other.scale {
            return self.limbs == other.limbs;
        }
        let n = self.scale.max(other.scale);
        let (sa, sb) = (n - self.scale, n - other.scale);
        for t in 0..1u64 << n {
            if self.digit(t >> sa) != other.digit(t >> sb) {
                return false;
            }
        }
        true
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Hash digits at the minimal scale so the hash respects
        // embedding-equality.
        let n0 = self.minimal_scale();
        let stride = 1u64 << (self.scale - n0);
        self.p.get().hash(state);
        n0.hash(state);
        for b in 0..1u64 << n0 {
            self.digit(b * stride).hash(state);
        }
    }
}

/// Text form `p,scale:digits`, digits most significant first, one base-36
/// character each.
impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}:", self.p, self.scale)?;
        for t in 0..self.len() {
            write!(
                f,
                "{}",
                char::from_digit(u32::from(self.digit(t)), 36).unwrap()
            )?;
        }
        Ok(())
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupElement> {
        let bad = |why: &str| Error::Parse(format!("element {s:?}: {why}"));
        let (head, digits) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let (p_str, scale_str) = head.split_once(',').ok_or_else(|| bad("missing ','"))?;
        let p = Prime::new(p_str.parse().map_err(|_| bad("bad modulus"))?)?;
        let scale: u32 = scale_str.parse().map_err(|_| bad("bad scale"))?;
        check_scale(scale)?;
        if digits.len() as u64 != 1u64 << scale {
            return Err(bad("digit count does not match scale"));
        }
        let mut vals = Vec::with_capacity(digits.len());
        for c in digits.chars() {
            let d = c.to_digit(36).ok_or_else(|| bad("bad digit"))? as u64;
            if d >= p.get() {
                return Err(bad("digit out of range"));
            }
            vals.push(d as u8);
        }
        GroupElement::from_digits(p, scale, &vals)
    }
}

/// Number of elements at the given scale, when it fits in `u64`.
pub fn group_size(p: Prime, scale: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..1u64 << scale {
        acc = acc.checked_mul(p.get())?;
    }
    Some(acc)
}

/// Streams a contiguous index range of the lexicographic enumeration.
/// Ranges can be split freely across workers; the stream for a fixed range
/// is deterministic.
pub struct GroupRange {
    p: Prime,
    scale: u32,
    next: u64,
    end: u64,
    digits: Vec<u8>,
    primed: bool,
}

impl GroupRange {
    /// The full group, provided its size fits the element budget.
    pub fn all(p: Prime, scale: u32, budget: u64) -> Result<GroupRange> {
        check_scale(scale)?;
        let size = group_size(p, scale).ok_or(Error::BudgetExceeded {
            needed: format!("{}^{}", p, 1u64 << scale),
            budget,
        })?;
        if size > budget {
            return Err(Error::BudgetExceeded {
                needed: size.to_string(),
                budget,
            });
        }
        GroupRange::slice(p, scale, 0, size)
    }

    /// The elements with indices in `start..end`.
    pub fn slice(p: Prime, scale: u32, start: u64, end: u64) -> Result<GroupRange> {
        check_scale(scale)?;
        if let Some(size) = group_size(p, scale) {
            if start > end || end > size {
                return Err(Error::InvalidSpec(format!(
                    "range {start}..{end} out of bounds for group of size {size}"
                )));
            }
        }
        Ok(GroupRange {
            p,
            scale,
            next: start,
            end,
            digits: vec![0; 1usize << scale],
            primed: false,
        })
    }

    pub fn len(&self) -> u64 {
        self.end - self.next
    }

    pub fn is_empty(&self) -> bool {
        self.next >= self.end
    }
}

impl Iterator for GroupRange {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        if self.next >= self.end {
            return None;
        }
        if !self.primed {
            let seed = GroupElement::from_index(self.p, self.scale, self.next).ok()?;
            self.digits = seed.to_digits();
            self.primed = true;
        } else {
            // Base-p odometer on the digit buffer, least significant last.
            let pp = (self.p.get() - 1) as u8;
            for d in self.digits.iter_mut().rev() {
                if *d == pp {
                    *d = 0;
                } else {
                    *d += 1;
                    break;
                }
            }
        }
        self.next += 1;
        Some(GroupElement::from_digits(self.p, self.scale, &self.digits).unwrap())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}
