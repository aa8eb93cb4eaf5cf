//! Coset coverage: does a set meet every coset of every codimension-`d`
//! subgroup, and does it contain a particular coset outright?
//!
//! Cosets are presented by a functional system together with a value
//! pattern. Density up to dimension `d` quantifies over all independent
//! systems of size at most `d` and all `p^k` patterns. Over the two
//! element field at packed scales the quantification runs on bit codes:
//! each functional's values over the member list are packed into machine
//! words once, after which a system's uncovered patterns are visible as
//! empty bitwise combinations.

use super::{enumerate_systems, FunctionalSystem};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::field_group::{group_size, GroupRange};
use crate::GroupElement;
use num_bigint::BigUint;
use num_integer::binomial;
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub max_dimension: usize,
    pub systems_checked: u64,
    pub dense: bool,
    /// Rendered missed coset when not dense.
    pub witness: Option<String>,
}

/// Whether `members` meets every coset of codimension up to `d`.
/// `budget` bounds the total number of candidate systems across all
/// dimensions.
pub fn dense_upto(
    p: Prime,
    scale: u32,
    members: &[GroupElement],
    d: usize,
    budget: u64,
) -> Result<DensityReport> {
    dense_upto_impl(p, scale, members, d, budget, false)
}

// `force_general` lets tests cross-check the packed path against the
// generic one.
pub(crate) fn dense_upto_impl(
    p: Prime,
    scale: u32,
    members: &[GroupElement],
    d: usize,
    budget: u64,
    force_general: bool,
) -> Result<DensityReport> {
    if d == 0 || d > 8 {
        return Err(Error::InvalidSpec(format!("dimension {d} out of range 1..=8")));
    }
    for m in members {
        assert_eq!(m.prime(), p, "member prime mismatch");
        assert_eq!(m.scale(), scale, "member scale mismatch");
    }
    let q_minus_1 = BigUint::from(p.get()).pow(1u32 << scale) - 1u32;
    let mut work = BigUint::from(0u32);
    for k in 1..=d {
        work += binomial(q_minus_1.clone(), BigUint::from(k));
    }
    if work > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { needed: work.to_string(), budget });
    }

    let mut report = DensityReport {
        max_dimension: d,
        systems_checked: 0,
        dense: true,
        witness: None,
    };
    // The packed path needs the group size in a u64, hence scale <= 5.
    let fast = !force_general && p.get() == 2 && scale <= 5 && d <= 2;
    if fast {
        dense_p2(p, scale, members, d, &mut report)?;
    } else {
        for k in 1..=d {
            dense_general(p, scale, members, k, budget, &mut report)?;
            if !report.dense {
                break;
            }
        }
    }
    Ok(report)
}

fn dense_general(
    p: Prime,
    scale: u32,
    members: &[GroupElement],
    k: usize,
    budget: u64,
    report: &mut DensityReport,
) -> Result<()> {
    for sys in enumerate_systems(p, scale, k, budget)? {
        report.systems_checked += 1;
        if sys.pattern_count() > 1 << 24 {
            return Err(Error::BudgetExceeded {
                needed: format!("{} patterns", sys.pattern_count()),
                budget: 1 << 24,
            });
        }
        let patterns = sys.pattern_count() as usize;
        let mut covered = vec![false; patterns];
        let mut left = patterns;
        for m in members {
            let idx = sys.pattern_index(m) as usize;
            if !covered[idx] {
                covered[idx] = true;
                left -= 1;
                if left == 0 {
                    break;
                }
            }
        }
        if left > 0 {
            let missing = covered.iter().position(|&c| !c).unwrap();
            report.dense = false;
            report.witness = Some(render_miss(&sys, missing as u64));
            return Ok(());
        }
    }
    Ok(())
}

fn render_miss(sys: &FunctionalSystem, mut pattern_index: u64) -> String {
    let p = sys.prime().get();
    let mut pattern = vec![0u8; sys.dimension()];
    for slot in pattern.iter_mut().rev() {
        *slot = (pattern_index % p) as u8;
        pattern_index /= p;
    }
    format!("system={sys} missed pattern={pattern:?}")
}

// Packed path: functional and member coefficient vectors fit in a word.
fn dense_p2(
    p: Prime,
    scale: u32,
    members: &[GroupElement],
    d: usize,
    report: &mut DensityReport,
) -> Result<()> {
    let q = group_size(p, scale).expect("packed scale");
    let codes: Vec<u64> = {
        let mut seen = HashSet::new();
        members
            .iter()
            .map(GroupElement::p2_bits)
            .filter(|c| seen.insert(*c))
            .collect()
    };
    let n = codes.len();
    let functional = |f: u64| {
        super::Functional::new(GroupElement::from_index(p, scale, f).expect("in range"))
    };

    for f in 1..q {
        report.systems_checked += 1;
        let (mut any0, mut any1) = (false, false);
        for &c in &codes {
            if (f & c).count_ones() & 1 == 1 {
                any1 = true;
            } else {
                any0 = true;
            }
            if any0 && any1 {
                break;
            }
        }
        if !(any0 && any1) {
            let sys = FunctionalSystem::new(vec![functional(f)]).expect("nonzero");
            report.dense = false;
            report.witness = Some(render_miss(&sys, u64::from(!any1)));
            return Ok(());
        }
    }
    if d < 2 {
        return Ok(());
    }

    let words = n.div_ceil(64).max(1);
    let table_bytes = (q - 1) * (words as u64) * 8;
    if table_bytes > 1 << 30 {
        return Err(Error::BudgetExceeded { needed: format!("{table_bytes} bytes"), budget: 1 << 30 });
    }

    // img[f] = values of functional f over the member list, bit-packed.
    let mut img = vec![0u64; (q - 1) as usize * words];
    for f in 1..q {
        let row = &mut img[(f - 1) as usize * words..][..words];
        for (j, &c) in codes.iter().enumerate() {
            if (f & c).count_ones() & 1 == 1 {
                row[j / 64] |= 1 << (j % 64);
            }
        }
    }
    let mut mask = vec![u64::MAX; words];
    mask[words - 1] = if n.is_multiple_of(64) && n > 0 { u64::MAX } else { (1u64 << (n % 64)) - 1 };

    for a in 1..q {
        let ra = &img[(a - 1) as usize * words..][..words];
        for b in a + 1..q {
            report.systems_checked += 1;
            let rb = &img[(b - 1) as usize * words..][..words];
            // Patterns still missing, one bit per value pair (a, b).
            let mut need = 0b1111u8;
            for w in 0..words {
                let (x, y, m) = (ra[w], rb[w], mask[w]);
                if !x & !y & m != 0 {
                    need &= !(1 << 0);
                }
                if !x & y != 0 {
                    need &= !(1 << 1);
                }
                if x & !y != 0 {
                    need &= !(1 << 2);
                }
                if x & y != 0 {
                    need &= !(1 << 3);
                }
                if need == 0 {
                    break;
                }
            }
            if need != 0 {
                let missing = need.trailing_zeros() as u64;
                let sys = FunctionalSystem::new(vec![functional(a), functional(b)])
                    .expect("distinct nonzero");
                report.dense = false;
                report.witness = Some(render_miss(&sys, missing));
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Whether `members` contains the entire coset `{g : sys(g) = pattern}`.
/// Walks the group, so `budget` bounds the group size.
pub fn contains_coset(
    members: &[GroupElement],
    sys: &FunctionalSystem,
    pattern: &[u8],
    budget: u64,
) -> Result<bool> {
    assert_eq!(pattern.len(), sys.dimension(), "pattern length mismatch");
    let p = sys.prime();
    for &v in pattern {
        assert!(u64::from(v) < p.get(), "pattern value out of range");
    }
    let set: HashSet<&GroupElement> = members.iter().collect();
    for g in GroupRange::all(p, sys.scale(), budget)? {
        if sys.pattern(&g) == pattern && !set.contains(&g) {
            return Ok(false);
        }
    }
    Ok(true)
}
