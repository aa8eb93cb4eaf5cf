//! Machine checks that differences of the avoiding set miss the forbidden
//! balls.
//!
//! Three statements are checked over concrete instances. An instance pairs
//! an `A`-member `a` (cell `x` of prefix `l`) with a forbidden shift
//! `s = 1 + u`, `u` in the level-`j` ball:
//!
//! 1. `label-shift-escapes`: `x + 1` lies outside `E` for every `x` in `E`
//!    (the arithmetic fact driving everything; always exhaustive over `E`).
//! 2. `shift-mechanism`: `a + s` classifies into cell `x + 1` of the
//!    margin-reduced prefix `max(j, l)` (radii subtracted from margins).
//! 3. `difference-avoidance`: `a + s` is not a member of `A`, so the
//!    difference `(a + s) - a = s` witnesses no collision.
//!
//! [`verify_shifted_avoidance`] checks the follow-up statement that the
//! shifted family `A + S` has the same property: differences of two
//! `A + S` members stay outside `S`. Its mechanism reduces each margin
//! twice, so it requires `2 k_j < m_j`.

use super::{Construction, ConstructionParams};
use crate::error::{Error, Result};
use crate::field_group::{GroupElement, GroupRange};
use crate::hamming::{enumerate_ball, sample_ball, Ball};
use crate::partition::{CellLabel, CellSampler, Classifier, VerifyMode};
use crate::report::CheckOutcome;
use crate::rng;
use rand::Rng;

pub const DISJOINTNESS_TAGS: [&str; 3] = [
    "label-shift-escapes",
    "shift-mechanism",
    "difference-avoidance",
];

const SAMPLER_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointnessReport {
    /// "full" when every pair in range was checked, "concatenation-subset"
    /// when members came from the concatenation sampler (which covers only
    /// the concatenation sublattice of each cell).
    pub coverage: &'static str,
    /// No `A`-member was available: every level is vacuous (or `E` is
    /// empty), so the pair checks hold trivially.
    pub a_empty: bool,
    pub checks: Vec<CheckOutcome>,
}

impl DisjointnessReport {
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

/// Checks the three disjointness statements for the given parameters.
pub fn verify_disjointness(
    params: &ConstructionParams,
    mode: VerifyMode,
) -> Result<DisjointnessReport> {
    run_disjointness(params, params.radii(), mode)
}

// Ball radii are taken separately from the margin reductions so tests can
// confirm the checker catches violations: shifting by a radius above the
// level's declared one breaks the mechanism for real.
fn run_disjointness(
    params: &ConstructionParams,
    ball_radii: &[u64],
    mode: VerifyMode,
) -> Result<DisjointnessReport> {
    let p = params.prime();
    let spec = params.spec();
    let construction = Construction::new(params.clone());
    let reduced: Vec<Classifier> = (1..=params.depth())
        .map(|r| {
            let prefix = spec.prefix(r).reduce_margins(&params.radii()[..r])?;
            Ok(Classifier::new(prefix))
        })
        .collect::<Result<_>>()?;
    let balls: Vec<Ball> = spec
        .levels()
        .iter()
        .zip(ball_radii)
        .map(|(lv, &k)| Ball::new(lv.scale, k))
        .collect();

    let mut checks: Vec<CheckOutcome> =
        DISJOINTNESS_TAGS.into_iter().map(CheckOutcome::new).collect();
    let [escape, mechanism, avoidance] = &mut checks[..] else { unreachable!() };

    for x in params.e().iter() {
        let next = CellLabel::Cell(x).shift(1, p);
        escape.check(
            next.cell_index().is_none_or(|y| !params.e().contains(y)),
            || format!("{x} + 1 stays in {}", params.e()),
        );
    }

    let mut check_pair = |l: usize, a: &GroupElement, x: u8, j: usize, u: &GroupElement| {
        let s = u.add_constant(1);
        let r = l.max(j);
        let scale = spec.levels()[r].scale;
        let sum = &a.embed(scale) + &s.embed(scale);
        let want = CellLabel::Cell(x).shift(1, p);
        let got = reduced[r].classify(&sum).expect("matching scale");
        mechanism.check(got == want, || {
            format!("a={a} s={s} level={l} ball-level={j} got={got} want={want}")
        });
        avoidance.check(!construction.in_a(&sum), || {
            format!("a={a} s={s} level={l} ball-level={j}: a+s is a member")
        });
    };

    let mut a_empty = true;
    let coverage = match mode {
        VerifyMode::Exhaustive { budget } => {
            for (l, a, x) in collect_members(params, budget)? {
                a_empty = false;
                for (j, &ball) in balls.iter().enumerate() {
                    for u in enumerate_ball(p, ball, budget)? {
                        check_pair(l, &a, x, j, &u);
                    }
                }
            }
            "full"
        }
        VerifyMode::Sampled { trials, seed } => {
            let samplers = prefix_samplers(params)?;
            let e_members: Vec<u8> = params.e().iter().collect();
            if !samplers.is_empty() && !e_members.is_empty() {
                a_empty = false;
                let mut rng = rng::stream(seed, 0);
                for _ in 0..trials {
                    let x = e_members[rng.random_range(0..e_members.len())];
                    let l = rng.random_range(0..samplers.len());
                    let a = samplers[l].sample(x, &mut rng);
                    let j = rng.random_range(0..balls.len());
                    let u = sample_ball(p, balls[j], &mut rng);
                    check_pair(l, &a, x, j, &u);
                }
            }
            "concatenation-subset"
        }
    };

    Ok(DisjointnessReport { coverage, a_empty, checks })
}

/// Checks that differences within the shifted family `A + S` also avoid
/// `S`. Requires every level to satisfy `2 k_j < m_j`: the argument
/// reduces the margin by one radius to place each family member and by a
/// second to track the extra shift.
pub fn verify_shifted_avoidance(
    params: &ConstructionParams,
    mode: VerifyMode,
) -> Result<DisjointnessReport> {
    for lv in params.levels() {
        if 2 * u128::from(lv.radius) >= u128::from(lv.margin) {
            return Err(Error::InvalidSpec(format!(
                "doubled shift radius {} must stay below the margin {} at scale {}",
                2 * u128::from(lv.radius),
                lv.margin,
                lv.scale
            )));
        }
    }
    let p = params.prime();
    let scale = params.scale();
    let construction = Construction::new(params.clone());
    let balls = params.balls();
    let mut outcome = CheckOutcome::new("shifted-family-avoidance");

    let mut check_pair = |a1: &GroupElement, a2: &GroupElement| {
        let d = a1 - a2;
        outcome.check(!construction.in_s(&d), || {
            format!("({a1}) - ({a2}) = {d} lands in a forbidden ball")
        });
    };

    let mut a_empty = true;
    let coverage = match mode {
        VerifyMode::Exhaustive { budget } => {
            let mut family: Vec<GroupElement> = Vec::new();
            for (_, a, _) in collect_members(params, budget)? {
                for &ball in &balls {
                    for u in enumerate_ball(p, ball, budget)? {
                        family.push(&a.embed(scale) + &u.add_constant(1).embed(scale));
                    }
                }
            }
            let pairs = (family.len() as u128).pow(2);
            if pairs > u128::from(budget) {
                return Err(Error::BudgetExceeded { needed: pairs.to_string(), budget });
            }
            a_empty = family.is_empty();
            for a1 in &family {
                for a2 in &family {
                    check_pair(a1, a2);
                }
            }
            "full"
        }
        VerifyMode::Sampled { trials, seed } => {
            let samplers = prefix_samplers(params)?;
            let e_members: Vec<u8> = params.e().iter().collect();
            if !samplers.is_empty() && !e_members.is_empty() {
                a_empty = false;
                let mut rng = rng::stream(seed, 0);
                let draw = |rng: &mut rng::TaskRng| {
                    let x = e_members[rng.random_range(0..e_members.len())];
                    let l = rng.random_range(0..samplers.len());
                    let a = samplers[l].sample(x, rng);
                    let j = rng.random_range(0..balls.len());
                    let u = sample_ball(p, balls[j], rng);
                    &a.embed(scale) + &u.add_constant(1).embed(scale)
                };
                for _ in 0..trials {
                    let a1 = draw(&mut rng);
                    let a2 = draw(&mut rng);
                    check_pair(&a1, &a2);
                }
            }
            "concatenation-subset"
        }
    };

    Ok(DisjointnessReport { coverage, a_empty, checks: vec![outcome] })
}

/// Every `A`-member reachable by exhaustive walks: for each prefix `l`,
/// the scale-`n_l` elements classified into an `E`-indexed cell, tagged
/// with `(l, element, cell index)`.
fn collect_members(
    params: &ConstructionParams,
    budget: u64,
) -> Result<Vec<(usize, GroupElement, u8)>> {
    let p = params.prime();
    let mut members = Vec::new();
    for l in 0..params.depth() {
        let classifier = Classifier::new(params.spec().prefix(l + 1));
        for g in GroupRange::all(p, params.spec().levels()[l].scale, budget)? {
            if let Ok(CellLabel::Cell(x)) = classifier.classify(&g) {
                if params.e().contains(x) {
                    members.push((l, g, x));
                }
            }
        }
    }
    Ok(members)
}

/// Concatenation samplers for the non-vacuous prefixes (a vacuous level
/// empties every deeper prefix, so the usable prefixes form an initial
/// run).
fn prefix_samplers(params: &ConstructionParams) -> Result<Vec<CellSampler>> {
    let mut samplers = Vec::new();
    for l in 1..=params.depth() {
        match CellSampler::new(&params.spec().prefix(l), SAMPLER_BUDGET) {
            Ok(s) => samplers.push(s),
            Err(Error::VacuousLevel { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(samplers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn exhaustive_single_level_preset_passes() {
        let params = ConstructionParams::preset("p2-exhaustive").unwrap();
        let report =
            verify_disjointness(&params, VerifyMode::Exhaustive { budget: 1 << 12 }).unwrap();
        assert!(report.ok(), "{:?}", report.checks);
        assert!(!report.a_empty);
        assert_eq!(report.coverage, "full");
        // 9 cell members times the 9 elements of the radius-1 ball at
        // scale 3.
        assert_eq!(report.check("shift-mechanism").trials, 81);
        assert_eq!(report.check("difference-avoidance").trials, 81);
        assert_eq!(report.check("label-shift-escapes").trials, 1);
    }

    #[test]
    fn exhaustive_vacuous_preset_passes_trivially() {
        let params = ConstructionParams::preset("p3-exhaustive").unwrap();
        let report =
            verify_disjointness(&params, VerifyMode::Exhaustive { budget: 1 << 12 }).unwrap();
        assert!(report.ok());
        assert!(report.a_empty);
        assert!(report.check("shift-mechanism").trivially_true());
        assert!(report.check("difference-avoidance").trivially_true());
        assert_eq!(report.check("label-shift-escapes").trials, 1);
    }

    #[test]
    fn sampled_two_level_preset_passes() {
        let params = ConstructionParams::preset("p2-sampled").unwrap();
        let mode = VerifyMode::Sampled { trials: 400, seed: 11 };
        let report = verify_disjointness(&params, mode).unwrap();
        assert!(report.ok(), "{:?}", report.checks);
        assert!(!report.a_empty);
        assert_eq!(report.coverage, "concatenation-subset");
        assert_eq!(report.check("shift-mechanism").trials, 400);
        assert_eq!(report.check("difference-avoidance").trials, 400);
    }

    #[test]
    fn sampled_vacuous_parameters_report_empty_membership() {
        let params = ConstructionParams::preset("p3-exhaustive").unwrap();
        let mode = VerifyMode::Sampled { trials: 50, seed: 3 };
        let report = verify_disjointness(&params, mode).unwrap();
        assert!(report.ok());
        assert!(report.a_empty);
        assert!(report.check("shift-mechanism").trivially_true());
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let params = ConstructionParams::preset("p2-sampled").unwrap();
        let mode = VerifyMode::Sampled { trials: 120, seed: 7 };
        let a = verify_disjointness(&params, mode).unwrap();
        let b = verify_disjointness(&params, mode).unwrap();
        assert_eq!(a.checks, b.checks);
    }

    #[test]
    fn oversized_shifts_are_caught() {
        // Balls of radius 2 against margins reduced by the declared radius
        // 1: the mechanism genuinely fails for some pairs, and the checker
        // must see it. The avoidance statement survives at these
        // parameters (the shifted element stays far from every cell).
        let params = ConstructionParams::preset("p2-exhaustive").unwrap();
        let report =
            run_disjointness(&params, &[2], VerifyMode::Exhaustive { budget: 1 << 12 }).unwrap();
        assert!(!report.ok());
        assert!(report.check("shift-mechanism").violations > 0);
        assert!(!report.check("shift-mechanism").witnesses.is_empty());
        assert!(report.check("difference-avoidance").passed());
        assert!(report.check("label-shift-escapes").passed());
    }

    #[test]
    fn shifted_family_avoidance_exhaustive() {
        // Margin 3 supports the doubled reduction. The only cell member at
        // these parameters is the all-ones element, giving a 9-element
        // family and 81 difference pairs.
        let params = ConstructionParams::new(p(2), &[(3, 3, 1)]).unwrap();
        let report =
            verify_shifted_avoidance(&params, VerifyMode::Exhaustive { budget: 1 << 13 }).unwrap();
        assert!(report.ok(), "{:?}", report.checks);
        assert!(!report.a_empty);
        assert_eq!(report.check("shifted-family-avoidance").trials, 81);
    }

    #[test]
    fn shifted_family_avoidance_sampled() {
        let params = ConstructionParams::new(p(2), &[(4, 3, 1)]).unwrap();
        let mode = VerifyMode::Sampled { trials: 500, seed: 21 };
        let report = verify_shifted_avoidance(&params, mode).unwrap();
        assert!(report.ok(), "{:?}", report.checks);
        assert_eq!(report.check("shifted-family-avoidance").trials, 500);
    }

    #[test]
    fn shifted_family_requires_doubled_radius_headroom() {
        let params = ConstructionParams::preset("p2-exhaustive").unwrap();
        let err = verify_shifted_avoidance(&params, VerifyMode::Exhaustive { budget: 1 << 12 });
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn exhaustive_mode_respects_the_budget() {
        let params = ConstructionParams::preset("p2-sampled").unwrap();
        let err = verify_disjointness(&params, VerifyMode::Exhaustive { budget: 1 << 12 });
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }
}
