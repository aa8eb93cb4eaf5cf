//! Exact cell counts via a profile dynamic program.
//!
//! The size of a cell is a sum over its class subsets `S` of the number of
//! block-label assignments whose counts follow `S`: choose a count profile
//! `(c_0, ..., c_{p-1})` meeting the thresholds, weight it by the
//! multinomial coefficient and by `w_v^(c_v)` where `w_v` is the number of
//! blocks carrying label `v` (1 at the innermost level, the tail cell count
//! above it; no weight for `Z`, whose count must be zero). The DP convolves
//! one label class at a time, so a profile's multinomial factor appears as
//! a telescoping product of binomials.
//!
//! Counts are big integers while the result fits the configured bit
//! budget; beyond that the same DP runs on natural logarithms with an
//! explicit error bound.

use super::{CellLabel, PartitionSpec, SubsetClassFamily};
use crate::field::Prime;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// A count: exact, or a log-space estimate with a bound on the error of
/// the natural logarithm (hence on the relative error of the value).
#[derive(Clone, Debug, PartialEq)]
pub enum CountValue {
    Exact(BigUint),
    Log { ln: f64, rel_err: f64 },
}

impl CountValue {
    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            CountValue::Exact(v) => Some(v),
            CountValue::Log { .. } => None,
        }
    }

    /// Natural log of the value; negative infinity for an exact zero.
    pub fn ln(&self) -> f64 {
        match self {
            CountValue::Exact(v) => ln_biguint(v),
            CountValue::Log { ln, .. } => *ln,
        }
    }
}

impl fmt::Display for CountValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountValue::Exact(v) => write!(f, "{v}"),
            CountValue::Log { ln, rel_err } => write!(f, "exp({ln:.6})~rel_err<{rel_err:.2e}"),
        }
    }
}

#[derive(Copy, Clone, Debug)]
pub struct CountConfig {
    /// Largest block count `2^(block scale)` the exact DP will convolve.
    pub max_exact_blocks: u64,
    /// Largest result size in bits for exact counting.
    pub exact_bit_budget: u64,
}

impl Default for CountConfig {
    fn default() -> CountConfig {
        CountConfig {
            max_exact_blocks: 4096,
            exact_bit_budget: 1 << 22,
        }
    }
}

/// Number of elements at the spec's scale.
pub fn group_count(p: Prime, scale: u32, cfg: &CountConfig) -> CountValue {
    let digits = 1u64 << scale;
    let bits = digits as f64 * (p.get() as f64).log2();
    if bits <= cfg.exact_bit_budget as f64 {
        CountValue::Exact(BigUint::from(p.get()).pow(digits as u32))
    } else {
        CountValue::Log {
            ln: digits as f64 * (p.get() as f64).ln(),
            rel_err: 1e-14,
        }
    }
}

/// Exact (or log-estimated) number of elements with the given label.
pub fn count_cell(spec: &PartitionSpec, label: CellLabel, cfg: &CountConfig) -> CountValue {
    let p = spec.prime();
    let exact_ok = exact_feasible(spec, cfg);
    match label {
        CellLabel::Cell(x) => {
            assert!(u64::from(x) < p.get(), "cell index out of range");
            if exact_ok {
                CountValue::Exact(exact_cells(spec)[usize::from(x)].clone())
            } else {
                let (ln, rel_err) = log_cells(spec)[usize::from(x)];
                CountValue::Log { ln, rel_err }
            }
        }
        CellLabel::Z => {
            let group = group_count(p, spec.scale(), cfg);
            if exact_ok {
                let group = group.as_exact().expect("group within exact budget").clone();
                let cells: BigUint = exact_cells(spec).into_iter().sum();
                CountValue::Exact(group - cells)
            } else {
                let cells = log_cells(spec);
                let (mut ln_cells, mut err) = (f64::NEG_INFINITY, 0f64);
                for (ln, e) in cells {
                    ln_cells = ln_add(ln_cells, ln);
                    err = err.max(e);
                }
                CountValue::Log {
                    ln: ln_sub(group.ln(), ln_cells),
                    rel_err: err + 1e-12,
                }
            }
        }
    }
}

fn exact_feasible(spec: &PartitionSpec, cfg: &CountConfig) -> bool {
    let blocks_ok = (0..spec.depth()).all(|i| 1u64 << spec.block_scale(i) <= cfg.max_exact_blocks);
    let bits = (1u64 << spec.scale()) as f64 * (spec.prime().get() as f64).log2();
    blocks_ok && bits <= cfg.exact_bit_budget as f64
}

/// Sizes of the `p` cells, innermost level outward. The per-label weights
/// at each stage are the cell sizes one stage in; they are equal across
/// labels (constant-shift relabeling is a bijection), which the tests
/// confirm, but the DP keeps them per-label anyway.
fn exact_cells(spec: &PartitionSpec) -> Vec<BigUint> {
    let p = spec.prime().get() as usize;
    let family = SubsetClassFamily::new(spec.prime());
    let weights: Vec<BigUint> = if spec.depth() == 1 {
        vec![BigUint::one(); p]
    } else {
        exact_cells(&spec.tail())
    };
    let n_blocks = 1u64 << spec.block_scale(0);
    let margin = spec.levels()[0].margin;
    (0..p as u8)
        .map(|x| {
            family
                .class(x)
                .iter()
                .map(|s| profile_dp(spec.prime(), n_blocks, margin, s.mask(), &weights))
                .sum()
        })
        .collect()
}

/// Label-count ranges allowed for one class under the thresholds; `None`
/// when the range is empty.
fn class_range(p: u64, n_blocks: u64, margin: u64, in_s: bool) -> Option<(u64, u64)> {
    if in_s {
        // p*c > n + p*m, c <= n.
        let lo = (n_blocks + p * margin) / p + 1;
        (lo <= n_blocks).then_some((lo, n_blocks))
    } else {
        // p*(c+m) < n.
        if p * margin >= n_blocks {
            return None;
        }
        Some((0, (n_blocks - p * margin - 1) / p))
    }
}

fn profile_dp(
    prime: Prime,
    n_blocks: u64,
    margin: u64,
    s_mask: u32,
    weights: &[BigUint],
) -> BigUint {
    let p = prime.get();
    let n = n_blocks as usize;
    let fact = factorials(n);
    let choose = |a: usize, b: usize| -> BigUint { &fact[a] / (&fact[b] * &fact[a - b]) };
    let mut dp: Vec<BigUint> = vec![BigUint::zero(); n + 1];
    dp[0] = BigUint::one();
    for v in 0..p {
        let range = match class_range(p, n_blocks, margin, s_mask & (1 << v) != 0) {
            None => return BigUint::zero(),
            Some(r) => r,
        };
        let w = &weights[v as usize];
        let last = v + 1 == p;
        let mut next: Vec<BigUint> = vec![BigUint::zero(); n + 1];
        for t in 0..=n {
            if dp[t].is_zero() {
                continue;
            }
            let (lo, hi) = (range.0 as usize, (range.1 as usize).min(n - t));
            if lo > hi {
                continue;
            }
            if last {
                // The final class must consume the remaining blocks exactly.
                let c = n - t;
                if c >= lo && c <= hi {
                    next[n] += &dp[t] * choose(n - t, c) * pow_cached(w, c);
                }
            } else {
                for c in lo..=hi {
                    next[t + c] += &dp[t] * choose(n - t, c) * pow_cached(w, c);
                }
            }
        }
        dp = next;
    }
    std::mem::take(&mut dp[n])
}

fn pow_cached(w: &BigUint, c: usize) -> BigUint {
    if w.is_one() {
        BigUint::one()
    } else {
        w.pow(c as u32)
    }
}

fn factorials(n: usize) -> Vec<BigUint> {
    let mut fact = Vec::with_capacity(n + 1);
    fact.push(BigUint::one());
    for i in 1..=n {
        let next = &fact[i - 1] * BigUint::from(i);
        fact.push(next);
    }
    fact
}

/// Log-space mirror of `exact_cells`: `(ln size, error bound)` per cell.
fn log_cells(spec: &PartitionSpec) -> Vec<(f64, f64)> {
    let p = spec.prime().get() as usize;
    let family = SubsetClassFamily::new(spec.prime());
    let weights: Vec<(f64, f64)> = if spec.depth() == 1 {
        vec![(0.0, 0.0); p]
    } else {
        log_cells(&spec.tail())
    };
    let n_blocks = 1u64 << spec.block_scale(0);
    let margin = spec.levels()[0].margin;
    (0..p as u8)
        .map(|x| {
            let (mut ln, mut err) = (f64::NEG_INFINITY, 0.0f64);
            for s in family.class(x) {
                let (l, e) = profile_dp_log(spec.prime(), n_blocks, margin, s.mask(), &weights);
                ln = ln_add(ln, l);
                err = err.max(e);
            }
            (ln, err)
        })
        .collect()
}

fn profile_dp_log(
    prime: Prime,
    n_blocks: u64,
    margin: u64,
    s_mask: u32,
    weights: &[(f64, f64)],
) -> (f64, f64) {
    let p = prime.get();
    let n = n_blocks as usize;
    let lnf = ln_factorials(n);
    let ln_choose = |a: usize, b: usize| lnf[a] - lnf[b] - lnf[a - b];
    let mut dp = vec![f64::NEG_INFINITY; n + 1];
    dp[0] = 0.0;
    let mut ops: u64 = 0;
    let mut w_err: f64 = 0.0;
    for v in 0..p {
        let range = match class_range(p, n_blocks, margin, s_mask & (1 << v) != 0) {
            None => return (f64::NEG_INFINITY, 0.0),
            Some(r) => r,
        };
        let (ln_w, ew) = weights[v as usize];
        w_err = w_err.max(ew);
        let last = v + 1 == p;
        let mut next = vec![f64::NEG_INFINITY; n + 1];
        for t in 0..=n {
            if dp[t] == f64::NEG_INFINITY {
                continue;
            }
            let (lo, hi) = (range.0 as usize, (range.1 as usize).min(n - t));
            if lo > hi {
                continue;
            }
            if last {
                let c = n - t;
                if c >= lo && c <= hi {
                    next[n] = ln_add(next[n], dp[t] + ln_choose(n - t, c) + c as f64 * ln_w);
                    ops += 1;
                }
            } else {
                for c in lo..=hi {
                    next[t + c] = ln_add(next[t + c], dp[t] + ln_choose(n - t, c) + c as f64 * ln_w);
                    ops += 1;
                }
            }
        }
        dp = next;
    }
    // Every term carries at most n factors of each kind; the bound is
    // deliberately loose.
    let err = n as f64 * w_err + (ops as f64 + 4.0 * n as f64) * 4.0 * f64::EPSILON;
    (dp[n], err)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for i in 1..=n {
        let next = out[i - 1] + (i as f64).ln();
        out.push(next);
    }
    out
}

pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn ln_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-((b - a).exp())).ln_1p()
}

pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_group::GroupRange;
    use crate::partition::Classifier;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn cfg() -> CountConfig {
        CountConfig::default()
    }

    fn exact(spec: &PartitionSpec, label: CellLabel) -> BigUint {
        count_cell(spec, label, &cfg()).as_exact().unwrap().clone()
    }

    fn filter_count(spec: &PartitionSpec, label: CellLabel) -> BigUint {
        let c = Classifier::new(spec.clone());
        let hits = GroupRange::all(spec.prime(), spec.scale(), 1 << 20)
            .unwrap()
            .filter(|g| c.classify(g).unwrap() == label)
            .count();
        BigUint::from(hits)
    }

    #[test]
    fn frozen_single_level_counts() {
        // Margin 0 diagnostic: strict majority of four digits.
        let relaxed = PartitionSpec::relaxed(p(2), &[(2, 0)]).unwrap();
        assert_eq!(exact(&relaxed, CellLabel::Cell(0)), BigUint::from(5u32));
        assert_eq!(exact(&relaxed, CellLabel::Z), BigUint::from(6u32));

        let s32 = PartitionSpec::new(p(2), &[(3, 2)]).unwrap();
        assert_eq!(exact(&s32, CellLabel::Cell(0)), BigUint::from(9u32));

        let s41 = PartitionSpec::new(p(2), &[(4, 1)]).unwrap();
        assert_eq!(exact(&s41, CellLabel::Cell(0)), BigUint::from(14893u32));
        assert_eq!(
            exact(&s41, CellLabel::Z),
            BigUint::from(65536u32 - 2 * 14893)
        );

        let t21 = PartitionSpec::new(p(3), &[(2, 1)]).unwrap();
        assert_eq!(exact(&t21, CellLabel::Cell(0)), BigUint::from(1u32));
        assert_eq!(exact(&t21, CellLabel::Z), BigUint::from(78u32));

        // Vacuous specs count zero everywhere but Z.
        let t22 = PartitionSpec::new(p(3), &[(2, 2)]).unwrap();
        assert_eq!(exact(&t22, CellLabel::Cell(1)), BigUint::zero());
        assert_eq!(exact(&t22, CellLabel::Z), BigUint::from(81u32));
    }

    #[test]
    fn frozen_two_level_count() {
        // ((3,2),(6,2)) over F_2: every cell member decomposes as a
        // cell-label pattern (itself a base cell member) with arbitrary
        // base-cell blocks, giving exactly 9^9.
        let spec = PartitionSpec::new(p(2), &[(3, 2), (6, 2)]).unwrap();
        assert_eq!(
            exact(&spec, CellLabel::Cell(0)),
            BigUint::from(387420489u64)
        );
        assert_eq!(exact(&spec, CellLabel::Cell(1)), BigUint::from(387420489u64));
    }

    #[test]
    fn counts_match_exhaustive_filter() {
        let cases: Vec<(u64, Vec<(u32, u64)>)> = vec![
            (2, vec![(2, 1)]),
            (2, vec![(3, 1)]),
            (2, vec![(3, 2)]),
            (3, vec![(1, 1)]),
            (3, vec![(2, 1)]),
            (3, vec![(2, 2)]),
            (2, vec![(2, 1), (4, 1)]),
            (2, vec![(1, 1), (4, 1)]),
            (5, vec![(1, 1)]),
        ];
        for (pr, levels) in cases {
            let spec = PartitionSpec::new(p(pr), &levels).unwrap();
            for x in 0..pr as u8 {
                assert_eq!(
                    exact(&spec, CellLabel::Cell(x)),
                    filter_count(&spec, CellLabel::Cell(x)),
                    "cell {x} of {spec} over p={pr}"
                );
            }
            assert_eq!(exact(&spec, CellLabel::Z), filter_count(&spec, CellLabel::Z));
        }
    }

    #[test]
    fn cells_and_remainder_tile_the_group() {
        for (pr, levels) in [
            (2u64, vec![(4u32, 1u64)]),
            (3, vec![(2, 1)]),
            (2, vec![(3, 2), (6, 2)]),
        ] {
            let spec = PartitionSpec::new(p(pr), &levels).unwrap();
            let total: BigUint = (0..pr as u8)
                .map(|x| exact(&spec, CellLabel::Cell(x)))
                .sum::<BigUint>()
                + exact(&spec, CellLabel::Z);
            assert_eq!(
                &total,
                group_count(p(pr), spec.scale(), &cfg()).as_exact().unwrap()
            );
        }
    }

    #[test]
    fn large_scale_majority_count_matches_binomial_tail() {
        // p=2, scale 10, margin 1: cell 0 is the set of vectors with at
        // least 514 zeros among 1024 digits.
        let spec = PartitionSpec::new(p(2), &[(10, 1)]).unwrap();
        let got = exact(&spec, CellLabel::Cell(0));
        let mut expect = BigUint::zero();
        for j in 514..=1024u64 {
            expect += num_integer::binomial(BigUint::from(1024u64), BigUint::from(j));
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn log_path_tracks_the_exact_count()
    {
        let spec = PartitionSpec::new(p(2), &[(10, 1)]).unwrap();
        let exact_val = exact(&spec, CellLabel::Cell(0));
        let tiny = CountConfig {
            max_exact_blocks: 4,
            exact_bit_budget: 8,
        };
        match count_cell(&spec, CellLabel::Cell(0), &tiny) {
            CountValue::Log { ln, rel_err } => {
                let true_ln = ln_biguint(&exact_val);
                assert!((ln - true_ln).abs() <= rel_err.max(1e-9), "{ln} vs {true_ln}");
                assert!(rel_err < 1e-6);
            }
            CountValue::Exact(_) => panic!("expected log path"),
        }
        match count_cell(&spec, CellLabel::Z, &tiny) {
            CountValue::Log { ln, .. } => {
                let true_ln = ln_biguint(&exact(&spec, CellLabel::Z));
                assert!((ln - true_ln).abs() < 1e-9);
            }
            CountValue::Exact(_) => panic!("expected log path"),
        }
    }

    #[test]
    fn group_count_switches_representation() {
        assert_eq!(
            group_count(p(2), 4, &cfg()).as_exact().unwrap(),
            &BigUint::from(65536u32)
        );
        let tiny = CountConfig {
            max_exact_blocks: 4096,
            exact_bit_budget: 8,
        };
        match group_count(p(2), 10, &tiny) {
            CountValue::Log { ln, .. } => {
                assert!((ln - 1024.0 * std::f64::consts::LN_2).abs() < 1e-9);
            }
            CountValue::Exact(_) => panic!("expected log representation"),
        }
    }
}
