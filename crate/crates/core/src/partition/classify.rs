//! Classification of elements into cells.
//!
//! `Classifier` walks the level structure once per element: blocks are
//! labeled bottom-up, and at each stage the label counts either follow
//! exactly one class subset (strictly above the high threshold on it,
//! strictly below the low threshold off it) or the element falls into `Z`.
//! The followed subset is unique when it exists, because following `S`
//! pins down `S` as exactly the labels above the high threshold; cell
//! disjointness is therefore structural, and the test suites re-verify it
//! through [`Classifier::member_via_bias`], which walks the class subsets
//! literally instead of solving for the followed set.
//!
//! Thresholds are exact: `c > N/p + m` is evaluated as `p*c > N + p*m` and
//! `c < N/p - m` as `p*(c + m) < N`, all in integers.

use super::{CellLabel, PartitionSpec, SubsetClassFamily};
use crate::error::{Error, Result};
use crate::field::FieldSubset;
use crate::field_group::GroupElement;

/// Upper bound on supported residue counts, sized for `MAX_PRIME`.
pub(crate) const MAX_P: usize = 19;

pub struct Classifier {
    spec: PartitionSpec,
    family: SubsetClassFamily,
}

impl Classifier {
    pub fn new(spec: PartitionSpec) -> Classifier {
        let family = SubsetClassFamily::new(spec.prime());
        Classifier { spec, family }
    }

    #[inline]
    pub fn spec(&self) -> &PartitionSpec {
        &self.spec
    }

    #[inline]
    pub fn family(&self) -> &SubsetClassFamily {
        &self.family
    }

    /// Labels an element. Coarser elements embed to the spec scale; finer
    /// ones must be constant on spec-scale cylinders.
    pub fn classify(&self, g: &GroupElement) -> Result<CellLabel> {
        Ok(self.classify_digits(&self.adapt(g)?))
    }

    /// Labels an unpacked digit vector of length `2^(spec scale)`.
    pub fn classify_digits(&self, digits: &[u8]) -> CellLabel {
        debug_assert_eq!(digits.len() as u64, 1u64 << self.spec.scale());
        self.rec(0, digits)
    }

    /// Membership of `g` in cell `x` evaluated from the definition: some
    /// class subset of `x` is followed by the block-label counts.
    pub fn member_via_bias(&self, g: &GroupElement, x: u8) -> Result<bool> {
        let digits = self.adapt(g)?;
        Ok(self.member_via_bias_digits(&digits, x))
    }

    pub fn member_via_bias_digits(&self, digits: &[u8], x: u8) -> bool {
        let counts = match self.stage_counts(0, digits) {
            None => return false,
            Some(c) => c,
        };
        let n_blocks = 1u64 << self.spec.block_scale(0);
        let margin = self.spec.levels()[0].margin;
        self.family.class(x).iter().any(|s| {
            profile_follows(
                self.spec.prime().get(),
                n_blocks,
                margin,
                s.mask(),
                &counts,
            )
        })
    }

    fn adapt(&self, g: &GroupElement) -> Result<Vec<u8>> {
        let target = self.spec.scale();
        if g.prime() != self.spec.prime() {
            return Err(Error::InvalidSpec(format!(
                "element modulus {} does not match spec modulus {}",
                g.prime(),
                self.spec.prime()
            )));
        }
        let digits = if g.scale() == target {
            g.to_digits()
        } else if g.scale() < target {
            g.embed(target).to_digits()
        } else {
            g.compress(target)?.to_digits()
        };
        Ok(digits)
    }

    /// Block-label counts at stage `idx`, or `None` when a block lands in
    /// `Z` (which forces the whole element into `Z`).
    fn stage_counts(&self, idx: usize, digits: &[u8]) -> Option<[u64; MAX_P]> {
        let n_blocks = 1usize << self.spec.block_scale(idx);
        let mut counts = [0u64; MAX_P];
        if idx + 1 == self.spec.depth() {
            // Innermost stage: blocks are single digits, labeled by value.
            debug_assert_eq!(digits.len(), n_blocks);
            for &d in digits {
                counts[usize::from(d)] += 1;
            }
        } else {
            let block_len = digits.len() / n_blocks;
            for b in 0..n_blocks {
                match self.rec(idx + 1, &digits[b * block_len..(b + 1) * block_len]) {
                    CellLabel::Z => return None,
                    CellLabel::Cell(v) => counts[usize::from(v)] += 1,
                }
            }
        }
        Some(counts)
    }

    fn rec(&self, idx: usize, digits: &[u8]) -> CellLabel {
        let counts = match self.stage_counts(idx, digits) {
            None => return CellLabel::Z,
            Some(c) => c,
        };
        let p = self.spec.prime().get();
        let n_blocks = 1u64 << self.spec.block_scale(idx);
        let margin = self.spec.levels()[idx].margin;
        // The only candidate subset is the set of labels above the high
        // threshold; the element follows it iff the rest sit below the low
        // threshold.
        let mut s_mask = 0u32;
        for v in 0..p {
            let c = counts[v as usize];
            if above_high(p, c, n_blocks, margin) {
                s_mask |= 1 << v;
            } else if !below_low(p, c, n_blocks, margin) {
                return CellLabel::Z;
            }
        }
        match self.family.class_of_mask(s_mask) {
            Some(x) => CellLabel::Cell(x),
            None => CellLabel::Z,
        }
    }
}

#[inline]
fn above_high(p: u64, c: u64, n_blocks: u64, margin: u64) -> bool {
    u128::from(p) * u128::from(c) > u128::from(n_blocks) + u128::from(p) * u128::from(margin)
}

#[inline]
fn below_low(p: u64, c: u64, n_blocks: u64, margin: u64) -> bool {
    u128::from(p) * (u128::from(c) + u128::from(margin)) < u128::from(n_blocks)
}

/// Whether label counts follow the subset `s_mask` at the given margin.
pub(crate) fn profile_follows(
    p: u64,
    n_blocks: u64,
    margin: u64,
    s_mask: u32,
    counts: &[u64; MAX_P],
) -> bool {
    for v in 0..p {
        let c = counts[v as usize];
        let ok = if s_mask & (1 << v) != 0 {
            above_high(p, c, n_blocks, margin)
        } else {
            below_low(p, c, n_blocks, margin)
        };
        if !ok {
            return false;
        }
    }
    true
}

/// The bias predicate over an arbitrary block labeling: cuts `g` into
/// `2^count_scale` restrictions, labels each with `inner`, and asks whether
/// the counts follow `s` at the margin with no restriction unlabeled.
/// `s` may be any subset; the empty and full subsets are never followed,
/// since the counts sum to the number of blocks.
pub fn bias_contains<F>(
    g: &GroupElement,
    count_scale: u32,
    margin: u64,
    s: FieldSubset,
    mut inner: F,
) -> Result<bool>
where
    F: FnMut(&GroupElement) -> CellLabel,
{
    assert_eq!(g.prime(), s.prime(), "mismatched moduli");
    if count_scale > g.scale() {
        return Err(Error::InvalidSpec(format!(
            "count scale {count_scale} exceeds element scale {}",
            g.scale()
        )));
    }
    let n_blocks = 1u64 << count_scale;
    let mut counts = [0u64; MAX_P];
    for tau in 0..n_blocks {
        match inner(&g.restrict(count_scale, tau)) {
            CellLabel::Z => return Ok(false),
            CellLabel::Cell(v) => counts[usize::from(v)] += 1,
        }
    }
    Ok(profile_follows(
        g.prime().get(),
        n_blocks,
        margin,
        s.mask(),
        &counts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldValue, Prime};
    use crate::field_group::{group_size, GroupRange};

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn spec(pr: u64, levels: &[(u32, u64)]) -> PartitionSpec {
        PartitionSpec::new(p(pr), levels).unwrap()
    }

    fn classify_all(c: &Classifier) -> Vec<CellLabel> {
        GroupRange::all(c.spec().prime(), c.spec().scale(), 1 << 20)
            .unwrap()
            .map(|g| c.classify(&g).unwrap())
            .collect()
    }

    #[test]
    fn single_level_thresholds() {
        let c = Classifier::new(spec(2, &[(2, 1)]));
        let g = |d: &[u8]| GroupElement::from_digits(p(2), 2, d).unwrap();
        assert_eq!(c.classify(&g(&[1, 1, 1, 1])).unwrap(), CellLabel::Cell(1));
        assert_eq!(c.classify(&g(&[0, 0, 0, 0])).unwrap(), CellLabel::Cell(0));
        assert_eq!(c.classify(&g(&[0, 0, 1, 1])).unwrap(), CellLabel::Z);
        assert_eq!(c.classify(&g(&[0, 1, 1, 1])).unwrap(), CellLabel::Z);
    }

    #[test]
    fn constants_classify_to_their_value_when_no_level_is_vacuous() {
        for (pr, levels) in [
            (2u64, vec![(3u32, 2u64)]),
            (2, vec![(3, 2), (6, 2)]),
            (3, vec![(2, 1)]),
            (3, vec![(2, 1), (4, 1)]),
            (5, vec![(3, 1)]),
        ] {
            let c = Classifier::new(spec(pr, &levels));
            assert!(!c.spec().has_vacuous_level());
            for x in 0..pr {
                let g = GroupElement::constant(
                    c.spec().scale(),
                    FieldValue::new(p(pr), x).unwrap(),
                )
                .unwrap();
                assert_eq!(c.classify(&g).unwrap(), CellLabel::Cell(x as u8));
            }
        }
    }

    #[test]
    fn vacuous_levels_send_everything_to_z() {
        let c = Classifier::new(spec(3, &[(2, 2)]));
        assert!(c.spec().has_vacuous_level());
        for label in classify_all(&c) {
            assert_eq!(label, CellLabel::Z);
        }
    }

    #[test]
    fn labels_partition_the_group_and_cells_have_equal_sizes() {
        for (pr, levels) in [
            (2u64, vec![(2u32, 1u64)]),
            (2, vec![(3, 2)]),
            (3, vec![(1, 1)]),
            (3, vec![(2, 1)]),
            (2, vec![(2, 1), (4, 1)]),
        ] {
            let c = Classifier::new(spec(pr, &levels));
            let labels = classify_all(&c);
            let mut cell_counts = vec![0u64; pr as usize];
            let mut z = 0u64;
            for label in &labels {
                match label {
                    CellLabel::Cell(x) => cell_counts[usize::from(*x)] += 1,
                    CellLabel::Z => z += 1,
                }
            }
            let total = group_size(p(pr), c.spec().scale()).unwrap();
            assert_eq!(cell_counts.iter().sum::<u64>() + z, total);
            for x in 1..pr as usize {
                assert_eq!(cell_counts[x], cell_counts[0], "{pr} {levels:?}");
            }
        }
    }

    #[test]
    fn classify_agrees_with_literal_class_membership() {
        for (pr, levels) in [
            (2u64, vec![(3u32, 2u64)]),
            (3, vec![(2, 1)]),
            (2, vec![(2, 1), (4, 1)]),
        ] {
            let c = Classifier::new(spec(pr, &levels));
            for g in GroupRange::all(p(pr), c.spec().scale(), 1 << 20).unwrap() {
                let label = c.classify(&g).unwrap();
                let memberships: Vec<u8> = (0..pr as u8)
                    .filter(|&x| c.member_via_bias(&g, x).unwrap())
                    .collect();
                match label {
                    CellLabel::Cell(x) => assert_eq!(memberships, vec![x]),
                    CellLabel::Z => assert!(memberships.is_empty()),
                }
            }
        }
    }

    #[test]
    fn frozen_single_level_cell_size() {
        // p=2, scale 3, margin 2: a cell is the nine vectors with at least
        // seven of eight digits equal.
        let c = Classifier::new(spec(2, &[(3, 2)]));
        let count = classify_all(&c)
            .into_iter()
            .filter(|l| *l == CellLabel::Cell(0))
            .count();
        assert_eq!(count, 9);
    }

    #[test]
    fn two_level_classification_matches_blockwise_oracle() {
        // Independent route: label each scale-2 block with the base
        // classifier, then apply the counting thresholds by hand.
        let full = Classifier::new(spec(2, &[(2, 1), (4, 1)]));
        let base = Classifier::new(spec(2, &[(2, 1)]));
        for g in GroupRange::all(p(2), 4, 1 << 20).unwrap() {
            let mut counts = [0u64; 2];
            let mut z = false;
            for tau in 0..4u64 {
                match base.classify(&g.restrict(2, tau)).unwrap() {
                    CellLabel::Z => z = true,
                    CellLabel::Cell(v) => counts[usize::from(v)] += 1,
                }
            }
            let expect = if z {
                CellLabel::Z
            } else {
                // N = 4 blocks, margin 1: above needs 2c > 4 + 2, below 2(c+1) < 4.
                let hi: Vec<u8> = (0..2u8).filter(|&v| 2 * counts[usize::from(v)] > 6).collect();
                let lo_ok = (0..2u8)
                    .filter(|v| !hi.contains(v))
                    .all(|v| 2 * (counts[usize::from(v)] + 1) < 4);
                if hi.len() == 1 && lo_ok {
                    CellLabel::Cell(hi[0])
                } else {
                    CellLabel::Z
                }
            };
            assert_eq!(full.classify(&g).unwrap(), expect, "{g}");
        }
    }

    #[test]
    fn empty_and_full_subsets_are_never_followed() {
        let pr = p(3);
        let digit_value = |r: &GroupElement| CellLabel::Cell(r.digit(0));
        for g in GroupRange::all(pr, 2, 1 << 20).unwrap() {
            assert!(!bias_contains(&g, 2, 0, FieldSubset::empty(pr), digit_value).unwrap());
            assert!(!bias_contains(&g, 2, 0, FieldSubset::full(pr), digit_value).unwrap());
        }
    }

    #[test]
    fn generic_bias_predicate_matches_the_classifier_on_single_levels() {
        let c = Classifier::new(spec(3, &[(2, 1)]));
        let digit_value = |r: &GroupElement| CellLabel::Cell(r.digit(0));
        for g in GroupRange::all(p(3), 2, 1 << 20).unwrap() {
            for x in 0..3u8 {
                let via_generic = c.family().class(x).iter().any(|s| {
                    bias_contains(&g, 2, 1, *s, digit_value).unwrap()
                });
                assert_eq!(via_generic, c.member_via_bias(&g, x).unwrap());
            }
        }
    }

    #[test]
    fn scale_adaptation() {
        let c = Classifier::new(spec(2, &[(3, 2)]));
        let coarse = GroupElement::constant(1, FieldValue::new(p(2), 1).unwrap()).unwrap();
        assert_eq!(c.classify(&coarse).unwrap(), CellLabel::Cell(1));
        let fine_ok = coarse.embed(5);
        assert_eq!(c.classify(&fine_ok).unwrap(), CellLabel::Cell(1));
        let fine_bad = GroupElement::from_index(p(2), 5, 1).unwrap();
        assert!(c.classify(&fine_bad).is_err());
    }
}
