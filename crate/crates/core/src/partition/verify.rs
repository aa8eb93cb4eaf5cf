//! Machine checks for the stability laws the cells obey under shifts.
//!
//! Seven statements are checked, each over every instance (exhaustive
//! mode) or a seeded random sample (sampled mode):
//!
//! 1. `constant-shift.i`: adding the constant `y` moves cell `x` to cell
//!    `x + y` and fixes the remainder class.
//! 2. `hamming-stability.ii`: adding a radius-`k` ball element at the
//!    scale of level `j` keeps a cell member in the same cell once the
//!    margin of level `j` is reduced by `k`.
//! 3. `shift-with-hamming.iii`: the two moves compose.
//! 4. `cell-disjointness.iv`: no element satisfies the bias-union
//!    membership route for two different cells.
//! 5. `margin-monotonicity.v`: reducing every margin only enlarges each
//!    cell, so membership is preserved.
//! 6. `reduced-disjointness.vi`: disjointness survives the reduction.
//! 7. `level-extension.vii`: embedding a cell member lands in the same
//!    cell of the spec extended by one more level.
//!
//! A part with zero applicable instances (all cells empty because some
//! level is vacuous) passes trivially and reports zero trials.

use super::{CellLabel, CellSampler, Classifier, PartitionSpec};
use crate::error::{Error, Result};
use crate::field::FieldValue;
use crate::field_group::GroupRange;
use crate::hamming::{enumerate_ball, sample_ball, Ball};
use crate::rng;
use crate::GroupElement;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Check every instance; error if the group has more than `budget`
    /// elements.
    Exhaustive { budget: u64 },
    /// Check `trials` seeded random instances per part.
    Sampled { trials: u64, seed: u64 },
}

pub const PART_TAGS: [&str; 7] = [
    "constant-shift.i",
    "hamming-stability.ii",
    "shift-with-hamming.iii",
    "cell-disjointness.iv",
    "margin-monotonicity.v",
    "reduced-disjointness.vi",
    "level-extension.vii",
];

const SAMPLER_BUDGET: u64 = 1 << 24;

/// Outcome of one lemma part; see [`crate::report::CheckOutcome`].
pub type PartOutcome = crate::report::CheckOutcome;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftLemmaReport {
    pub spec: PartitionSpec,
    pub reductions: Vec<u64>,
    pub parts: Vec<PartOutcome>,
}

impl ShiftLemmaReport {
    pub fn ok(&self) -> bool {
        self.parts.iter().all(PartOutcome::passed)
    }

    pub fn part(&self, tag: &str) -> &PartOutcome {
        self.parts
            .iter()
            .find(|p| p.tag == tag)
            .unwrap_or_else(|| panic!("unknown part tag {tag}"))
    }
}

/// Checks all seven statements for the spec with per-level margin
/// reductions `reductions` (one entry per level, each strictly below the
/// level's margin; entries of zero skip no checks but perturb by the zero
/// ball only).
pub fn verify_shift_lemma(
    spec: &PartitionSpec,
    reductions: &[u64],
    mode: VerifyMode,
) -> Result<ShiftLemmaReport> {
    run_parts(spec, reductions, reductions, mode)
}

// Ball radii are taken separately from the margin reductions so tests can
// confirm the checker catches violations: perturbing by radius k+1 while
// reducing margins by k genuinely breaks stability.
fn run_parts(
    spec: &PartitionSpec,
    reductions: &[u64],
    radii: &[u64],
    mode: VerifyMode,
) -> Result<ShiftLemmaReport> {
    if reductions.len() != spec.depth() || radii.len() != spec.depth() {
        return Err(Error::InvalidSpec(format!(
            "need one margin reduction per level ({} levels, {} reductions)",
            spec.depth(),
            reductions.len()
        )));
    }
    let p = spec.prime();
    let scale = spec.scale();
    let classifier = Classifier::new(spec.clone());
    let reduced_full = Classifier::new(spec.reduce_margins(reductions)?);
    let reduced_level: Vec<Classifier> = (0..spec.depth())
        .map(|j| spec.reduce_margin(j, reductions[j]).map(Classifier::new))
        .collect::<Result<_>>()?;
    let extended = Classifier::new(spec.extended()?);
    let ext_scale = extended.spec().scale();

    let mut parts: Vec<PartOutcome> = PART_TAGS.into_iter().map(PartOutcome::new).collect();
    let (head, tail) = parts.split_at_mut(4);
    let [part_i, part_ii, part_iii, part_iv] = head else { unreachable!() };
    let [part_v, part_vi, part_vii] = tail else { unreachable!() };

    let bias_hits = |c: &Classifier, g: &GroupElement| -> usize {
        (0..p.get() as u8)
            .filter(|&x| c.member_via_bias(g, x).expect("matching scale"))
            .count()
    };

    match mode {
        VerifyMode::Exhaustive { budget } => {
            let mut members: Vec<(GroupElement, u8)> = Vec::new();
            for g in GroupRange::all(p, scale, budget)? {
                let label = classifier.classify(&g).expect("matching scale");
                for y in 0..p.get() as u8 {
                    let got = classifier
                        .classify(&(&g + &constant(p, scale, y)))
                        .expect("matching scale");
                    part_i.check(got == label.shift(y, p), || {
                        format!("g={g} y={y} got={got} want={}", label.shift(y, p))
                    });
                }
                part_iv.check(bias_hits(&classifier, &g) <= 1, || {
                    format!("g={g} satisfies two cell routes")
                });
                part_vi.check(bias_hits(&reduced_full, &g) <= 1, || {
                    format!("g={g} satisfies two reduced cell routes")
                });
                if let CellLabel::Cell(x) = label {
                    members.push((g, x));
                }
            }

            let balls: Vec<Vec<GroupElement>> = (0..spec.depth())
                .map(|j| {
                    let ball = Ball::new(spec.levels()[j].scale, radii[j]);
                    Ok(enumerate_ball(p, ball, budget)?
                        .map(|u| u.embed(scale))
                        .collect())
                })
                .collect::<Result<_>>()?;

            for (g, x) in &members {
                let want = CellLabel::Cell(*x);
                part_v.check(
                    reduced_full.classify(g).expect("matching scale") == want,
                    || format!("g={g} left cell {x} under margin reduction"),
                );
                part_vii.check(
                    extended.classify(&g.embed(ext_scale)).expect("embedded scale") == want,
                    || format!("g={g} left cell {x} under level extension"),
                );
                for (j, ball) in balls.iter().enumerate() {
                    for u in ball {
                        let gu = g + u;
                        let got = reduced_level[j].classify(&gu).expect("matching scale");
                        part_ii.check(got == want, || {
                            format!("g={g} u={u} level={j} got={got} want={want}")
                        });
                        for y in 0..p.get() as u8 {
                            let shifted = &gu + &constant(p, scale, y);
                            let got =
                                reduced_level[j].classify(&shifted).expect("matching scale");
                            part_iii.check(got == want.shift(y, p), || {
                                format!(
                                    "g={g} u={u} y={y} level={j} got={got} want={}",
                                    want.shift(y, p)
                                )
                            });
                        }
                    }
                }
            }
        }
        VerifyMode::Sampled { trials, seed } => {
            let sampler = match CellSampler::new(spec, SAMPLER_BUDGET) {
                Ok(s) => Some(s),
                Err(Error::VacuousLevel { .. }) => None,
                Err(e) => return Err(e),
            };

            let mut rng = rng::stream(seed, 0);
            for _ in 0..trials {
                let g = random_element(p, scale, &mut rng);
                let y = rng.random_range(0..p.get()) as u8;
                let label = classifier.classify(&g).expect("matching scale");
                let got = classifier
                    .classify(&(&g + &constant(p, scale, y)))
                    .expect("matching scale");
                part_i.check(got == label.shift(y, p), || {
                    format!("g={g} y={y} got={got} want={}", label.shift(y, p))
                });
            }

            if let Some(sampler) = &sampler {
                let mut rng = rng::stream(seed, 1);
                for _ in 0..trials {
                    let x = rng.random_range(0..p.get()) as u8;
                    let g = sampler.sample(x, &mut rng);
                    let j = rng.random_range(0..spec.depth() as u64) as usize;
                    let u = sample_ball(
                        p,
                        Ball::new(spec.levels()[j].scale, radii[j]),
                        &mut rng,
                    )
                    .embed(scale);
                    let gu = &g + &u;
                    let got = reduced_level[j].classify(&gu).expect("matching scale");
                    part_ii.check(got == CellLabel::Cell(x), || {
                        format!("g={g} u={u} level={j} got={got} want cell {x}")
                    });

                    let y = rng.random_range(0..p.get()) as u8;
                    let shifted = &gu + &constant(p, scale, y);
                    let got = reduced_level[j].classify(&shifted).expect("matching scale");
                    part_iii.check(got == CellLabel::Cell(x).shift(y, p), || {
                        format!("g={g} u={u} y={y} level={j} got={got}")
                    });
                }

                let mut rng = rng::stream(seed, 2);
                for _ in 0..trials {
                    let x = rng.random_range(0..p.get()) as u8;
                    let g = sampler.sample(x, &mut rng);
                    let want = CellLabel::Cell(x);
                    part_v.check(
                        reduced_full.classify(&g).expect("matching scale") == want,
                        || format!("g={g} left cell {x} under margin reduction"),
                    );
                    part_vii.check(
                        extended.classify(&g.embed(ext_scale)).expect("embedded scale")
                            == want,
                        || format!("g={g} left cell {x} under level extension"),
                    );
                }
            }

            let mut rng = rng::stream(seed, 3);
            for _ in 0..trials {
                let g = random_element(p, scale, &mut rng);
                part_iv.check(bias_hits(&classifier, &g) <= 1, || {
                    format!("g={g} satisfies two cell routes")
                });
                part_vi.check(bias_hits(&reduced_full, &g) <= 1, || {
                    format!("g={g} satisfies two reduced cell routes")
                });
            }
        }
    }

    Ok(ShiftLemmaReport {
        spec: spec.clone(),
        reductions: reductions.to_vec(),
        parts,
    })
}

fn constant(p: crate::field::Prime, scale: u32, y: u8) -> GroupElement {
    GroupElement::constant(scale, FieldValue::new(p, u64::from(y)).unwrap()).unwrap()
}

fn random_element(p: crate::field::Prime, scale: u32, rng: &mut rng::TaskRng) -> GroupElement {
    let digits: Vec<u8> = (0..1u64 << scale)
        .map(|_| rng.random_range(0..p.get()) as u8)
        .collect();
    GroupElement::from_digits(p, scale, &digits).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn exhaustive_single_level_passes() {
        let spec = PartitionSpec::new(p(2), &[(3, 2)]).unwrap();
        let report =
            verify_shift_lemma(&spec, &[1], VerifyMode::Exhaustive { budget: 1 << 12 }).unwrap();
        assert!(report.ok());
        for part in &report.parts {
            assert!(part.trials > 0, "{} ran no instances", part.tag);
            assert!(!part.trivially_true());
        }
        // 256 elements, 18 cell members, 9 ball elements of radius 1 at
        // scale 3: the instance counts are fully determined.
        assert_eq!(report.part("constant-shift.i").trials, 512);
        assert_eq!(report.part("cell-disjointness.iv").trials, 256);
        assert_eq!(report.part("hamming-stability.ii").trials, 18 * 9);
        assert_eq!(report.part("shift-with-hamming.iii").trials, 18 * 9 * 2);
        assert_eq!(report.part("margin-monotonicity.v").trials, 18);
        assert_eq!(report.part("level-extension.vii").trials, 18);
    }

    #[test]
    fn exhaustive_vacuous_spec_passes_with_trivial_member_parts() {
        let spec = PartitionSpec::new(p(3), &[(2, 2)]).unwrap();
        let report =
            verify_shift_lemma(&spec, &[1], VerifyMode::Exhaustive { budget: 1 << 12 }).unwrap();
        assert!(report.ok());
        // Every element is in the remainder class, so the member-quantified
        // parts have nothing to check.
        assert!(report.part("hamming-stability.ii").trivially_true());
        assert!(report.part("level-extension.vii").trivially_true());
        assert_eq!(report.part("constant-shift.i").trials, 81 * 3);
        assert_eq!(report.part("cell-disjointness.iv").trials, 81);
    }

    #[test]
    fn sampled_two_level_passes() {
        let spec = PartitionSpec::new(p(2), &[(3, 2), (6, 2)]).unwrap();
        let mode = VerifyMode::Sampled { trials: 300, seed: 5 };
        let report = verify_shift_lemma(&spec, &[1, 1], mode).unwrap();
        assert!(report.ok(), "{:?}", report.parts);
        for part in &report.parts {
            assert!(part.trials >= 300, "{} ran {} instances", part.tag, part.trials);
        }
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let spec = PartitionSpec::new(p(3), &[(2, 1)]).unwrap();
        let mode = VerifyMode::Sampled { trials: 100, seed: 9 };
        let a = verify_shift_lemma(&spec, &[0], mode).unwrap();
        let b = verify_shift_lemma(&spec, &[0], mode).unwrap();
        assert_eq!(a.parts, b.parts);
    }

    #[test]
    fn oversized_perturbations_are_caught() {
        // Radius k+1 against margins reduced by k: stability genuinely
        // fails, and the checker must see it.
        let spec = PartitionSpec::new(p(2), &[(3, 2)]).unwrap();
        let report =
            run_parts(&spec, &[1], &[2], VerifyMode::Exhaustive { budget: 1 << 12 }).unwrap();
        assert!(!report.ok());
        assert!(report.part("hamming-stability.ii").violations > 0);
        assert!(!report.part("hamming-stability.ii").witnesses.is_empty());
        // Parts that ignore the radius still pass.
        assert!(report.part("constant-shift.i").passed());
        assert!(report.part("margin-monotonicity.v").passed());
    }

    #[test]
    fn reduction_vector_must_match_depth() {
        let spec = PartitionSpec::new(p(2), &[(3, 2)]).unwrap();
        let err = verify_shift_lemma(&spec, &[1, 1], VerifyMode::Exhaustive { budget: 1 << 12 });
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }
}
