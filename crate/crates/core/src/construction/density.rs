//! Level-by-level accounting of the share of each truncation occupied by
//! the avoiding set.
//!
//! At prefix `l` the `E`-indexed cells are pairwise disjoint and equal in
//! size, so the member count is `|E|` times one cell count and the level
//! fraction is that over the group size. Alongside the true count, each
//! level reports the concatenation lower bound: members of the previous
//! prefix extend to members here by filling every block with a member of
//! the matching single-level cell, so
//! `bound(l) = bound(l-1) * single_cell(block_l)^(blocks at the previous
//! scale)`. The bound is exact and attains the cell count when every block
//! assignment follows the label pattern uniquely.

use super::ConstructionParams;
use crate::partition::{count_cell, group_count, CellLabel, CountConfig, CountValue, PartitionSpec};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct LevelDensity {
    /// Prefix depth, 0-based.
    pub level: usize,
    /// Outermost scale of the prefix.
    pub scale: u32,
    /// Size of one cell of the prefix partition.
    pub cell: CountValue,
    /// `|E|` times the cell size: members of the truncated set at this scale.
    pub members: CountValue,
    pub group: CountValue,
    /// `members / group` as a float (exact values are converted through
    /// their logarithms).
    pub fraction: f64,
    /// Both counts were computed exactly.
    pub exact: bool,
    /// Concatenation lower bound on the cell size.
    pub concat_bound: CountValue,
    /// Whether the fraction strictly exceeds the target `|E| (1 - eps) / p`;
    /// `None` without a target, or when log-space error bounds leave the
    /// comparison undecided.
    pub meets_target: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub levels: Vec<LevelDensity>,
    /// The target fraction, when the parameters carry a slack.
    pub target: Option<Ratio<u64>>,
}

pub fn density_report(params: &ConstructionParams, cfg: &CountConfig) -> DensityReport {
    let p = params.prime();
    let spec = params.spec();
    let e_len = u64::from(params.e().len());
    let target = params
        .epsilon()
        .map(|eps| Ratio::new(e_len, p.get()) * (Ratio::one() - eps));

    let mut levels = Vec::with_capacity(params.depth());
    let mut bound = CountValue::Exact(BigUint::one());
    for l in 0..params.depth() {
        let prefix = spec.prefix(l + 1);
        let scale = prefix.scale();
        let cell = count_cell(&prefix, CellLabel::Cell(1), cfg);
        let group = group_count(p, scale, cfg);
        let members = scale_count(&cell, e_len, cfg);

        let block = spec.block_scale(l);
        let single = PartitionSpec::relaxed(p, &[(block, spec.levels()[l].margin)]).unwrap();
        let per_block = count_cell(&single, CellLabel::Cell(1), cfg);
        let copies = if l == 0 { 1 } else { 1u64 << spec.levels()[l - 1].scale };
        bound = mul_count(&bound, &pow_count(&per_block, copies, cfg), cfg);

        let exact = cell.as_exact().is_some() && group.as_exact().is_some();
        let fraction = if is_zero(&members) {
            0.0
        } else {
            (members.ln() - group.ln()).exp()
        };
        let meets_target = target.and_then(|t| compare_fraction(&members, &group, t));
        levels.push(LevelDensity {
            level: l,
            scale,
            cell,
            members,
            group,
            fraction,
            exact,
            concat_bound: bound.clone(),
            meets_target,
        });
    }
    DensityReport { levels, target }
}

fn is_zero(c: &CountValue) -> bool {
    c.as_exact().is_some_and(Zero::is_zero)
}

fn rel(c: &CountValue) -> f64 {
    match c {
        CountValue::Exact(_) => 0.0,
        CountValue::Log { rel_err, .. } => *rel_err,
    }
}

fn scale_count(c: &CountValue, k: u64, cfg: &CountConfig) -> CountValue {
    if k == 0 {
        return CountValue::Exact(BigUint::zero());
    }
    mul_count(c, &CountValue::Exact(BigUint::from(k)), cfg)
}

fn mul_count(a: &CountValue, b: &CountValue, cfg: &CountConfig) -> CountValue {
    if let (Some(x), Some(y)) = (a.as_exact(), b.as_exact()) {
        if x.bits() + y.bits() <= cfg.exact_bit_budget {
            return CountValue::Exact(x * y);
        }
    }
    CountValue::Log {
        ln: a.ln() + b.ln(),
        rel_err: rel(a) + rel(b) + 4.0 * f64::EPSILON,
    }
}

fn pow_count(base: &CountValue, exp: u64, cfg: &CountConfig) -> CountValue {
    if exp == 0 {
        return CountValue::Exact(BigUint::one());
    }
    if let Some(b) = base.as_exact() {
        if b.bits().saturating_mul(exp) <= cfg.exact_bit_budget {
            return CountValue::Exact(b.pow(exp.try_into().expect("bounded by bit budget")));
        }
    }
    CountValue::Log {
        ln: base.ln() * exp as f64,
        rel_err: (rel(base) + 2.0 * f64::EPSILON) * exp as f64,
    }
}

/// Exact comparison `members / group > target` when both counts are exact;
/// otherwise a log-space comparison that returns `None` inside the error
/// band.
fn compare_fraction(members: &CountValue, group: &CountValue, t: Ratio<u64>) -> Option<bool> {
    if let (Some(m), Some(g)) = (members.as_exact(), group.as_exact()) {
        return Some(m * t.denom() > g * t.numer());
    }
    let lhs = members.ln() + (*t.denom() as f64).ln();
    let rhs = group.ln() + (*t.numer() as f64).ln();
    let slack = rel(members) + rel(group) + 1e-12;
    if lhs - rhs > slack {
        Some(true)
    } else if rhs - lhs > slack {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn single_level_preset_counts() {
        let params = ConstructionParams::preset("p2-exhaustive").unwrap();
        let report = density_report(&params, &CountConfig::default());
        assert_eq!(report.levels.len(), 1);
        let lv = &report.levels[0];
        assert_eq!(lv.scale, 3);
        assert_eq!(lv.cell.as_exact(), Some(&big(9)));
        assert_eq!(lv.members.as_exact(), Some(&big(9)));
        assert_eq!(lv.group.as_exact(), Some(&big(256)));
        assert!(lv.exact);
        assert!((lv.fraction - 9.0 / 256.0).abs() < 1e-12);
        assert_eq!(lv.concat_bound.as_exact(), Some(&big(9)));
        assert_eq!(lv.meets_target, None);
    }

    #[test]
    fn two_level_preset_bound_is_tight() {
        // Each block assignment realizes exactly one label pattern, so the
        // concatenation bound 9 * 9^8 = 9^9 equals the true cell count.
        let params = ConstructionParams::preset("p2-sampled").unwrap();
        let report = density_report(&params, &CountConfig::default());
        let lv = &report.levels[1];
        assert_eq!(lv.cell.as_exact(), Some(&big(387_420_489)));
        assert_eq!(lv.concat_bound, lv.cell);
        assert_eq!(lv.group.as_exact(), Some(&BigUint::from(2u32).pow(64)));
        assert!((lv.fraction - 387_420_489.0 / 2f64.powi(64)).abs() < 1e-20);
    }

    #[test]
    fn target_comparison_is_exact() {
        let base = ConstructionParams::new(p(2), &[(4, 1, 0)]).unwrap();
        // Fraction is 14893/65536, about 0.2273.
        let strict = base
            .clone()
            .with_epsilon(Ratio::new(1, 2))
            .unwrap();
        let report = density_report(&strict, &CountConfig::default());
        assert_eq!(report.target, Some(Ratio::new(1, 4)));
        assert_eq!(report.levels[0].meets_target, Some(false));

        let loose = base.with_epsilon(Ratio::new(3, 5)).unwrap();
        let report = density_report(&loose, &CountConfig::default());
        assert_eq!(report.target, Some(Ratio::new(1, 5)));
        assert_eq!(report.levels[0].meets_target, Some(true));
    }

    #[test]
    fn log_path_levels_still_decide_clear_targets() {
        // Scale 13 exceeds the default exact block limit, so the counts
        // come back in log space; the fraction sits near 0.469.
        let params = ConstructionParams::new(p(2), &[(13, 1, 0)]).unwrap();
        let report = density_report(
            &params.clone().with_epsilon(Ratio::new(1, 5)).unwrap(),
            &CountConfig::default(),
        );
        let lv = &report.levels[0];
        assert!(!lv.exact);
        assert!(lv.fraction > 0.4 && lv.fraction < 0.5, "fraction={}", lv.fraction);
        assert_eq!(lv.meets_target, Some(true));

        let report = density_report(
            &params.with_epsilon(Ratio::new(1, 100)).unwrap(),
            &CountConfig::default(),
        );
        assert_eq!(report.levels[0].meets_target, Some(false));
    }

    #[test]
    fn remainder_share_shrinks_as_the_scale_grows() {
        // At fixed margin the remainder class loses ground: compare
        // Z(n)/group(n) across n by cross-multiplying exact counts.
        let cfg = CountConfig::default();
        let mut previous: Option<(BigUint, BigUint)> = None;
        for n in [2u32, 3, 4] {
            let spec = PartitionSpec::new(p(2), &[(n, 1)]).unwrap();
            let z = count_cell(&spec, CellLabel::Z, &cfg).as_exact().unwrap().clone();
            let g = group_count(p(2), n, &cfg).as_exact().unwrap().clone();
            if let Some((pz, pg)) = previous {
                assert!(&pz * &g > &z * &pg, "share did not shrink at n={n}");
            }
            previous = Some((z, g));
        }
    }
}
