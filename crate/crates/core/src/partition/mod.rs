//! The bias partition of a scale into `p` cells and a remainder class.
//!
//! A level spec is a strictly increasing list of scales with margins,
//! `(n_1, m_1), ..., (n_l, m_l)`. A scale-`n_l` element is classified by
//! cutting it into `2^(n_1)` blocks, classifying each block against the
//! tail levels (at the innermost level a block is a single digit, labeled
//! by its value), and then asking whether the label counts are biased: a
//! label set `S` is "followed" when every label in `S` appears strictly
//! more than `2^(n_1)/p + m_1` times and every other label strictly fewer
//! than `2^(n_1)/p - m_1` times, with no block unlabeled. The cell index of
//! the element is the class of `S` under [`SubsetClassFamily`]; elements
//! following no class land in the remainder label `Z`.
//!
//! Cells of a fixed spec are pairwise disjoint by construction and have
//! equal sizes across the `p` cell indices (adding a constant `y` to every
//! digit relabels cell `x` to cell `x+y`).

mod classes;
mod classify;
mod count;
mod sample;
mod verify;

pub use classes::SubsetClassFamily;
pub use classify::{bias_contains, Classifier};
pub use count::{count_cell, group_count, CountConfig, CountValue};
pub use sample::CellSampler;
pub use verify::{verify_shift_lemma, PartOutcome, ShiftLemmaReport, VerifyMode};

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::field_group::MAX_SCALE;
use std::fmt;

/// Label assigned by classification: one of the `p` cells, or the
/// remainder class.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum CellLabel {
    Cell(u8),
    Z,
}

impl CellLabel {
    /// Relabeling under adding the constant `y`: cells shift, `Z` stays.
    pub fn shift(self, y: u8, p: Prime) -> CellLabel {
        match self {
            CellLabel::Cell(x) => CellLabel::Cell(crate::field::add_mod(x, y, p.as_u8())),
            CellLabel::Z => CellLabel::Z,
        }
    }

    pub fn cell_index(self) -> Option<u8> {
        match self {
            CellLabel::Cell(x) => Some(x),
            CellLabel::Z => None,
        }
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Cell(x) => write!(f, "{x}"),
            CellLabel::Z => write!(f, "Z"),
        }
    }
}

/// One level: an absolute scale and a counting margin.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Level {
    pub scale: u32,
    pub margin: u64,
}

/// A strictly increasing list of levels over a fixed prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    p: Prime,
    levels: Vec<Level>,
}

impl PartitionSpec {
    /// Standard constructor; margins must be at least 1.
    pub fn new(p: Prime, levels: &[(u32, u64)]) -> Result<PartitionSpec> {
        let spec = PartitionSpec::relaxed(p, levels)?;
        if let Some(lv) = spec.levels.iter().find(|lv| lv.margin == 0) {
            return Err(Error::InvalidSpec(format!(
                "margin must be at least 1 (got 0 at scale {})",
                lv.scale
            )));
        }
        Ok(spec)
    }

    /// Like [`PartitionSpec::new`] but allows zero margins, for diagnostic
    /// counting runs.
    pub fn relaxed(p: Prime, levels: &[(u32, u64)]) -> Result<PartitionSpec> {
        if levels.is_empty() {
            return Err(Error::InvalidSpec("need at least one level".into()));
        }
        // With prev starting at 0 this also forces the first scale >= 1.
        let mut prev = 0u32;
        for &(n, _) in levels {
            if n <= prev {
                return Err(Error::InvalidSpec(format!(
                    "scales must increase strictly from 1 (got {n} after {prev})"
                )));
            }
            if n > MAX_SCALE {
                return Err(Error::ScaleTooLarge(n));
            }
            prev = n;
        }
        Ok(PartitionSpec {
            p,
            levels: levels
                .iter()
                .map(|&(scale, margin)| Level { scale, margin })
                .collect(),
        })
    }

    /// Parses the text form `n1:m1,n2:m2,...`.
    pub fn parse(p: Prime, text: &str) -> Result<PartitionSpec> {
        let mut levels = Vec::new();
        for part in text.split(',') {
            let (n, m) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("level {part:?}: expected scale:margin")))?;
            let n: u32 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad scale in {part:?}")))?;
            let m: u64 = m
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad margin in {part:?}")))?;
            levels.push((n, m));
        }
        PartitionSpec::new(p, &levels)
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// The outermost scale `n_l`; classified elements live here.
    #[inline]
    pub fn scale(&self) -> u32 {
        self.levels.last().unwrap().scale
    }

    /// Block scale of level `i` (0-based): `n_{i+1} - n_i`, with `n_0 = 0`.
    pub fn block_scale(&self, i: usize) -> u32 {
        let prev = if i == 0 { 0 } else { self.levels[i - 1].scale };
        self.levels[i].scale - prev
    }

    /// The first `l` levels.
    pub fn prefix(&self, l: usize) -> PartitionSpec {
        assert!(l >= 1 && l <= self.depth());
        PartitionSpec {
            p: self.p,
            levels: self.levels[..l].to_vec(),
        }
    }

    /// Drops the first level and rebases the remaining scales at `n_1`.
    /// Classifying a scale-`n_l` element runs this spec on its blocks.
    pub fn tail(&self) -> PartitionSpec {
        assert!(self.depth() >= 2);
        let base = self.levels[0].scale;
        PartitionSpec {
            p: self.p,
            levels: self.levels[1..]
                .iter()
                .map(|lv| Level {
                    scale: lv.scale - base,
                    margin: lv.margin,
                })
                .collect(),
        }
    }

    /// Shrinks the margin of level `j` by `k`; requires `k < m_j`.
    pub fn reduce_margin(&self, j: usize, k: u64) -> Result<PartitionSpec> {
        if j >= self.depth() {
            return Err(Error::InvalidSpec(format!("no level {j}")));
        }
        if k >= self.levels[j].margin {
            return Err(Error::InvalidSpec(format!(
                "shift radius {k} must stay below the margin {}",
                self.levels[j].margin
            )));
        }
        let mut levels = self.levels.clone();
        levels[j].margin -= k;
        Ok(PartitionSpec {
            p: self.p,
            levels,
        })
    }

    /// Shrinks every margin, one radius per level.
    pub fn reduce_margins(&self, ks: &[u64]) -> Result<PartitionSpec> {
        if ks.len() != self.depth() {
            return Err(Error::InvalidSpec(format!(
                "{} radii for {} levels",
                ks.len(),
                self.depth()
            )));
        }
        let mut out = self.clone();
        for (j, &k) in ks.iter().enumerate() {
            out = out.reduce_margin(j, k)?;
        }
        Ok(out)
    }

    /// Appends one more level, repeating the last block scale and margin.
    /// The level-extension law embeds cells of this spec into cells of the
    /// extended one.
    pub fn extended(&self) -> Result<PartitionSpec> {
        let last = *self.levels.last().unwrap();
        let block = self.block_scale(self.depth() - 1);
        let new_scale = last.scale + block;
        if new_scale > MAX_SCALE {
            return Err(Error::ScaleTooLarge(new_scale));
        }
        let mut levels = self.levels.clone();
        levels.push(Level {
            scale: new_scale,
            margin: last.margin,
        });
        Ok(PartitionSpec {
            p: self.p,
            levels,
        })
    }

    /// Levels whose bias window is unsatisfiable: `p * m_i >= 2^(block_i)`.
    /// Any vacuous level forces all cells of the spec to be empty; this is
    /// reported as a warning rather than an error.
    pub fn vacuous_levels(&self) -> Vec<usize> {
        (0..self.depth())
            .filter(|&i| {
                let block = self.block_scale(i);
                self.p.get().saturating_mul(self.levels[i].margin) >= 1u64 << block
            })
            .collect()
    }

    pub fn has_vacuous_level(&self) -> bool {
        !self.vacuous_levels().is_empty()
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for lv in &self.levels {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{}:{}", lv.scale, lv.margin)?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(PartitionSpec::new(p(2), &[(3, 2), (6, 2)]).is_ok());
        assert!(PartitionSpec::new(p(2), &[(3, 2), (3, 2)]).is_err());
        assert!(PartitionSpec::new(p(2), &[(6, 2), (3, 2)]).is_err());
        assert!(PartitionSpec::new(p(2), &[(3, 0)]).is_err());
        assert!(PartitionSpec::new(p(2), &[]).is_err());
        assert!(PartitionSpec::new(p(2), &[(0, 1)]).is_err());
        assert!(PartitionSpec::relaxed(p(2), &[(2, 0)]).is_ok());
    }

    #[test]
    fn parse_round_trip() {
        let spec = PartitionSpec::parse(p(2), "3:2,6:2").unwrap();
        assert_eq!(spec.to_string(), "3:2,6:2");
        assert_eq!(spec.depth(), 2);
        assert_eq!(spec.scale(), 6);
        assert!(PartitionSpec::parse(p(2), "3").is_err());
        assert!(PartitionSpec::parse(p(2), "a:1").is_err());
    }

    #[test]
    fn block_scales_and_tail() {
        let spec = PartitionSpec::new(p(2), &[(3, 2), (6, 1), (10, 4)]).unwrap();
        assert_eq!(spec.block_scale(0), 3);
        assert_eq!(spec.block_scale(1), 3);
        assert_eq!(spec.block_scale(2), 4);
        let tail = spec.tail();
        assert_eq!(tail.to_string(), "3:1,7:4");
        assert_eq!(spec.prefix(2).to_string(), "3:2,6:1");
    }

    #[test]
    fn margin_reduction_requires_room() {
        let spec = PartitionSpec::new(p(2), &[(3, 2), (6, 2)]).unwrap();
        assert_eq!(spec.reduce_margins(&[1, 1]).unwrap().to_string(), "3:1,6:1");
        assert!(spec.reduce_margin(0, 2).is_err());
        assert!(spec.reduce_margins(&[1]).is_err());
    }

    #[test]
    fn vacuity_is_margin_crowding_out_the_window() {
        // Lower window empty as soon as p*m reaches the block length.
        assert!(PartitionSpec::new(p(3), &[(2, 2)])
            .unwrap()
            .has_vacuous_level());
        assert!(PartitionSpec::new(p(3), &[(1, 1)])
            .unwrap()
            .has_vacuous_level());
        assert!(!PartitionSpec::new(p(3), &[(2, 1)])
            .unwrap()
            .has_vacuous_level());
        assert!(!PartitionSpec::new(p(2), &[(3, 2), (6, 2)])
            .unwrap()
            .has_vacuous_level());
        assert_eq!(
            PartitionSpec::new(p(2), &[(3, 2), (4, 2)])
                .unwrap()
                .vacuous_levels(),
            vec![1]
        );
    }

    #[test]
    fn extension_repeats_the_last_block() {
        let spec = PartitionSpec::new(p(2), &[(3, 2)]).unwrap();
        assert_eq!(spec.extended().unwrap().to_string(), "3:2,6:2");
        let two = PartitionSpec::new(p(2), &[(3, 2), (6, 2)]).unwrap();
        assert_eq!(two.extended().unwrap().to_string(), "3:2,6:2,9:2");
    }

    #[test]
    fn label_shift() {
        let p3 = p(3);
        assert_eq!(CellLabel::Cell(2).shift(2, p3), CellLabel::Cell(1));
        assert_eq!(CellLabel::Z.shift(2, p3), CellLabel::Z);
    }
}
