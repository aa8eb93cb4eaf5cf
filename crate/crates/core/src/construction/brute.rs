//! Brute-force verification of the density threshold for full difference
//! sets, on groups small enough to enumerate.
//!
//! Any subset with more than [`delta`](super::delta) times the group's
//! elements has a difference set equal to the whole group: a missing
//! difference `x` forces `A` and `A + x` apart, which caps `A` at
//! `floor(p/2)` members per coset of the cyclic subgroup generated by `x`.
//! The checker walks every subset above the threshold (or a random sample
//! of them) and confirms coverage; a companion check shows the threshold
//! is sharp by exhibiting a coset of an index-`p` subgroup, which sits at
//! (or below) the threshold and only reaches the subgroup's differences.

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::field_group::{group_size, GroupElement, GroupRange};
use crate::partition::VerifyMode;
use crate::report::CheckOutcome;
use crate::rng;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashSet;

pub const THRESHOLD_TAGS: [&str; 2] = ["difference-covers-group", "threshold-sharpness"];

const MAX_DIFF_TABLE: u64 = 4096;
const WINDOW_BUDGET: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdReport {
    pub group: u64,
    /// Smallest subset size strictly above the density threshold.
    pub min_size: u64,
    /// "full" when every subset above the threshold was checked.
    pub coverage: &'static str,
    pub checks: Vec<CheckOutcome>,
}

impl ThresholdReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn check(&self, tag: &str) -> &CheckOutcome {
        self.checks
            .iter()
            .find(|c| c.tag == tag)
            .unwrap_or_else(|| panic!("unknown check tag {tag}"))
    }
}

/// Checks that every subset of the scale-`scale` group whose size is above
/// the threshold has differences covering the whole group. Exhaustive mode
/// needs `2^group` subsets within the budget; sampled mode draws subsets
/// uniformly among the qualifying sizes.
pub fn difference_threshold_brute(
    p: Prime,
    scale: u32,
    mode: VerifyMode,
) -> Result<ThresholdReport> {
    let delta = super::delta(p);
    let (num, den) = (*delta.numer() as u128, *delta.denom() as u128);
    let budget = match mode {
        VerifyMode::Exhaustive { budget } => budget,
        VerifyMode::Sampled { .. } => WINDOW_BUDGET,
    };
    let diff = DiffContext::new(p, scale, budget)?;
    let q = diff.q;
    let min_size = ((num * u128::from(q)) / den) as u64 + 1;

    let mut checks: Vec<CheckOutcome> = THRESHOLD_TAGS.into_iter().map(CheckOutcome::new).collect();
    let [covers, sharp] = &mut checks[..] else { unreachable!() };

    let coverage = match mode {
        VerifyMode::Exhaustive { budget } => {
            if q >= 64 || 1u128 << q > u128::from(budget) {
                return Err(Error::BudgetExceeded {
                    needed: format!("2^{q}"),
                    budget,
                });
            }
            let full: u64 = ((1u128 << q) - 1) as u64;
            let failures: Vec<(u64, u64)> = (0..1u64 << q)
                .into_par_iter()
                .filter(|mask| u128::from(mask.count_ones()) * den > num * u128::from(q))
                .filter_map(|mask| {
                    let mut members = [0u8; 64];
                    let (mut m, mut cnt) = (mask, 0usize);
                    while m != 0 {
                        members[cnt] = m.trailing_zeros() as u8;
                        cnt += 1;
                        m &= m - 1;
                    }
                    let mut covered = 0u64;
                    for &i in &members[..cnt] {
                        for &j in &members[..cnt] {
                            covered |= 1 << diff.diff(i as usize, j as usize);
                        }
                        if covered == full {
                            return None;
                        }
                    }
                    Some((mask, u64::from((!covered & full).trailing_zeros())))
                })
                .collect();
            covers.trials = subsets_of_size_at_least(q, min_size);
            covers.violations = failures.len() as u64;
            for (mask, missing) in failures.iter().take(3) {
                covers
                    .witnesses
                    .push(format!("subset {mask:#x} misses element index {missing}"));
            }
            "full"
        }
        VerifyMode::Sampled { trials, seed } => {
            let mut rng = rng::stream(seed, 0);
            let mut pool: Vec<usize> = (0..q as usize).collect();
            for t in 0..trials {
                let size = rng.random_range(min_size..=q) as usize;
                // Partial Fisher-Yates: the first `size` entries become a
                // uniform random subset of that size.
                for i in 0..size {
                    let j = rng.random_range(i..pool.len());
                    pool.swap(i, j);
                }
                let members = &pool[..size];
                let missing = missing_difference(members, &diff);
                covers.check(missing.is_none(), || {
                    format!(
                        "trial {t}: subset of size {size} misses element index {}",
                        missing.unwrap()
                    )
                });
            }
            "random-subsets"
        }
    };

    // Sharpness: a coset of the subgroup fixing the first digit has
    // exactly group/p members (never above the threshold) and its
    // differences reach only the subgroup.
    let subgroup: HashSet<usize> =
        (0..q as usize).filter(|&i| diff.digits[i][0] == 0).collect();
    let coset: Vec<usize> = (0..q as usize).filter(|&i| diff.digits[i][0] == 1).collect();
    let above = u128::from(coset.len() as u64) * den > num * u128::from(q);
    let diff = &diff;
    let reaches: HashSet<usize> = coset
        .iter()
        .flat_map(|&i| coset.iter().map(move |&j| diff.diff(i, j) as usize))
        .collect();
    sharp.check(!above && reaches == subgroup, || {
        format!(
            "coset of size {} (threshold {}) reaches {} of {} elements",
            coset.len(),
            min_size,
            reaches.len(),
            q
        )
    });

    Ok(ThresholdReport { group: q, min_size, coverage, checks })
}

fn subsets_of_size_at_least(q: u64, min_size: u64) -> u64 {
    let mut total = BigUint::zero();
    for s in min_size..=q {
        total += num_integer::binomial(BigUint::from(q), BigUint::from(s));
    }
    total.to_u64().expect("subset count fits in u64 for q < 64")
}

/// First group index missing from the pairwise differences of `members`,
/// if any.
fn missing_difference(members: &[usize], diff: &DiffContext) -> Option<u64> {
    let q = diff.q as usize;
    let mut covered = vec![0u64; q.div_ceil(64)];
    let mut remaining = q;
    for &i in members {
        for &j in members {
            let d = diff.diff(i, j) as usize;
            if covered[d / 64] & (1 << (d % 64)) == 0 {
                covered[d / 64] |= 1 << (d % 64);
                remaining -= 1;
                if remaining == 0 {
                    return None;
                }
            }
        }
    }
    (0..q as u64).find(|&d| covered[d as usize / 64] & (1 << (d % 64)) == 0)
}

/// Pairwise difference indices over an enumerated group, with a
/// precomputed table when the group is small. Positions in the
/// enumeration coincide with lexicographic element indices.
struct DiffContext {
    q: u64,
    digits: Vec<Vec<u8>>,
    table: Option<Vec<u16>>,
    p: u64,
}

impl DiffContext {
    fn new(p: Prime, scale: u32, budget: u64) -> Result<DiffContext> {
        let digits: Vec<Vec<u8>> = GroupRange::all(p, scale, budget)?
            .map(|g| g.to_digits())
            .collect();
        let q = digits.len() as u64;
        let mut ctx = DiffContext { q, digits, table: None, p: p.get() };
        if q <= MAX_DIFF_TABLE {
            let n = q as usize;
            let mut table = vec![0u16; n * n];
            for i in 0..n {
                for j in 0..n {
                    table[i * n + j] = ctx.diff_slow(i, j) as u16;
                }
            }
            ctx.table = Some(table);
        }
        Ok(ctx)
    }

    #[inline]
    fn diff(&self, i: usize, j: usize) -> u64 {
        match &self.table {
            Some(t) => u64::from(t[i * self.q as usize + j]),
            None => self.diff_slow(i, j),
        }
    }

    fn diff_slow(&self, i: usize, j: usize) -> u64 {
        // Base-p digits, most significant first, matching the
        // lexicographic enumeration order.
        let (a, b) = (&self.digits[i], &self.digits[j]);
        let mut index = 0u64;
        for t in 0..a.len() {
            let d = (u64::from(a[t]) + self.p - u64::from(b[t])) % self.p;
            index = index * self.p + d;
        }
        index
    }
}

/// The translate of `a` best aligned with the window `f`: maximizes
/// `|(A - g) ∩ F|` over the ambient scale-`scale` group and returns the
/// first maximizer with its count. The average over all `g` is
/// `|A| |F| / |G|`, so by integrality the maximum is at least its ceiling;
/// that bound is asserted.
pub fn window_density(
    p: Prime,
    scale: u32,
    a: &[GroupElement],
    f: &[GroupElement],
) -> Result<(GroupElement, u64)> {
    let q = group_size(p, scale).filter(|&q| q <= WINDOW_BUDGET).ok_or(
        Error::BudgetExceeded {
            needed: format!("{}^{}", p, 1u64 << scale),
            budget: WINDOW_BUDGET,
        },
    )?;
    let normalize = |members: &[GroupElement]| -> HashSet<u64> {
        members
            .iter()
            .map(|g| {
                assert_eq!(g.prime(), p, "mismatched moduli");
                assert!(g.scale() <= scale, "member finer than the ambient scale");
                g.embed(scale).index().expect("index fits by the size guard")
            })
            .collect()
    };
    let a_set = normalize(a);
    let f_set = normalize(f);

    let mut best: Option<(GroupElement, u64)> = None;
    for g in GroupRange::all(p, scale, WINDOW_BUDGET)? {
        let count = a_set
            .iter()
            .filter(|&&ai| {
                let ag = &GroupElement::from_index(p, scale, ai).unwrap() - &g;
                f_set.contains(&ag.index().unwrap())
            })
            .count() as u64;
        if best.as_ref().is_none_or(|(_, c)| count > *c) {
            best = Some((g, count));
        }
    }
    let (g, count) = best.expect("group walks are nonempty");
    let bound = (a_set.len() as u128 * f_set.len() as u128).div_ceil(u128::from(q)) as u64;
    assert!(count >= bound, "translate count {count} under the average bound {bound}");
    Ok((g, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn exhaustive_sixteen_element_group() {
        let report = difference_threshold_brute(
            p(2),
            2,
            VerifyMode::Exhaustive { budget: 1 << 16 },
        )
        .unwrap();
        assert!(report.ok(), "{:?}", report.checks);
        assert_eq!(report.group, 16);
        assert_eq!(report.min_size, 9);
        // Subsets of size 9..=16 of a 16-element set.
        assert_eq!(report.check("difference-covers-group").trials, 26333);
        assert_eq!(report.check("threshold-sharpness").trials, 1);
        assert_eq!(report.coverage, "full");
    }

    #[test]
    fn exhaustive_nine_element_group() {
        let report = difference_threshold_brute(
            p(3),
            1,
            VerifyMode::Exhaustive { budget: 1 << 9 },
        )
        .unwrap();
        assert!(report.ok(), "{:?}", report.checks);
        assert_eq!(report.group, 9);
        assert_eq!(report.min_size, 4);
        // Subsets of size 4..=9 of a 9-element set.
        assert_eq!(report.check("difference-covers-group").trials, 382);
    }

    #[test]
    fn exhaustive_mode_respects_the_budget() {
        let err = difference_threshold_brute(
            p(2),
            2,
            VerifyMode::Exhaustive { budget: 1 << 10 },
        );
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
        // 2^256 subsets can never fit a u64 budget.
        let err = difference_threshold_brute(
            p(2),
            3,
            VerifyMode::Exhaustive { budget: u64::MAX },
        );
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn sampled_larger_groups_pass() {
        for (prime, scale, trials) in [(2u64, 3u32, 40u64), (3, 2, 6), (5, 1, 40)] {
            let mode = VerifyMode::Sampled { trials, seed: 17 };
            let report = difference_threshold_brute(p(prime), scale, mode).unwrap();
            assert!(report.ok(), "p={prime} scale={scale}: {:?}", report.checks);
            assert_eq!(report.check("difference-covers-group").trials, trials);
            assert_eq!(report.coverage, "random-subsets");
        }
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let mode = VerifyMode::Sampled { trials: 25, seed: 4 };
        let a = difference_threshold_brute(p(2), 3, mode).unwrap();
        let b = difference_threshold_brute(p(2), 3, mode).unwrap();
        assert_eq!(a.checks, b.checks);
    }

    #[test]
    fn window_against_the_whole_group_returns_the_set_size() {
        let a: Vec<GroupElement> = GroupRange::all(p(2), 2, 100)
            .unwrap()
            .filter(|g| g.weight() <= 1)
            .collect();
        let f: Vec<GroupElement> = GroupRange::all(p(2), 2, 100).unwrap().collect();
        let (g, count) = window_density(p(2), 2, &a, &f).unwrap();
        assert_eq!(count, a.len() as u64);
        assert_eq!(g.index(), Some(0));
    }

    #[test]
    fn window_against_a_subgroup_aligns_a_coset() {
        // A is a nontrivial coset of the first-digit-zero subgroup H;
        // translating by any member of A lays it exactly over H.
        let all: Vec<GroupElement> = GroupRange::all(p(3), 1, 100).unwrap().collect();
        let h: Vec<GroupElement> = all.iter().filter(|g| g.digit(0) == 0).cloned().collect();
        let a: Vec<GroupElement> = all.iter().filter(|g| g.digit(0) == 1).cloned().collect();
        let (g, count) = window_density(p(3), 1, &a, &h).unwrap();
        assert_eq!(count, h.len() as u64);
        assert_eq!(g.digit(0), 1);
    }

    #[test]
    fn window_bound_holds_for_random_sets() {
        // Half-density set against a 3-element subgroup: some translate
        // captures at least ceil(3/2) = 2 window members.
        let mut rng = rng::master(31);
        let a: Vec<GroupElement> = GroupRange::all(p(3), 1, 100)
            .unwrap()
            .filter(|_| rng.random_range(0..2) == 0)
            .collect();
        let f: Vec<GroupElement> = GroupRange::all(p(3), 1, 100)
            .unwrap()
            .filter(|g| g.digit(0) == 0)
            .collect();
        assert_eq!(f.len(), 3);
        if a.is_empty() {
            return;
        }
        let (_, count) = window_density(p(3), 1, &a, &f).unwrap();
        let bound = (a.len() as u64 * 3).div_ceil(9);
        assert!(count >= bound);
    }
}
