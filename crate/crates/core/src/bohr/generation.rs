//! Checks that small Hamming balls already realize every coset pattern.
//!
//! Fix `d` independent functionals at a scale. The weight-one elements
//! map onto vectors spanning the full pattern space, patterns scale
//! linearly, sums of `d` weight-one elements stay inside the radius-`d`
//! ball, and together these force the radius-`d` ball to hit all `p^d`
//! patterns. Each statement is checked directly over every functional
//! system at the scale:
//!
//! - `singleton-span.iii`: singleton images span the pattern space.
//! - `scalar-linearity.iv`: patterns commute with scalar multiplication.
//! - `ball-sum-closure.v`: sums of up to `d` weight-one elements lie in
//!   the radius-`d` ball.
//! - `pattern-surjectivity`: the radius-`d` ball covers all patterns.
//!
//! Larger radii only add elements, so covering at radius `d` covers at
//! every radius past `d`.

use super::{count_functionals, enumerate_systems, rank, Functional};
use crate::error::{Error, Result};
use crate::field::{FieldValue, Prime};
use crate::field_group::group_size;
use crate::hamming::{ball_size, enumerate_ball, in_u, Ball};
use crate::report::CheckOutcome;
use crate::GroupElement;
use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::ToPrimitive;

pub const GENERATION_TAGS: [&str; 4] = [
    "singleton-span.iii",
    "scalar-linearity.iv",
    "ball-sum-closure.v",
    "pattern-surjectivity",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationReport {
    pub prime: u64,
    pub scale: u32,
    pub dimension: usize,
    pub systems: u64,
    pub outcomes: Vec<CheckOutcome>,
}

impl GenerationReport {
    pub fn ok(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed)
    }

    pub fn outcome(&self, tag: &str) -> &CheckOutcome {
        self.outcomes
            .iter()
            .find(|o| o.tag == tag)
            .unwrap_or_else(|| panic!("unknown outcome tag {tag}"))
    }
}

/// Verifies the four statements for every independent system of `d`
/// functionals at the scale. `budget` bounds the total instance count.
pub fn verify_hamming_generation(
    p: Prime,
    scale: u32,
    d: usize,
    budget: u64,
) -> Result<GenerationReport> {
    run_generation(p, scale, d, d as u64, budget, false)
}

fn run_generation(
    p: Prime,
    scale: u32,
    d: usize,
    radius: u64,
    budget: u64,
    force_general: bool,
) -> Result<GenerationReport> {
    if d == 0 || d > 8 {
        return Err(Error::InvalidSpec(format!("dimension {d} out of range 1..=8")));
    }
    let q_minus_1 = count_functionals(p, scale);
    let ball = Ball::new(scale, radius);
    let ball_count = ball_size(p, ball);
    let singles = ball_size(p, Ball::new(scale, 1));
    let work = binomial(q_minus_1.clone(), BigUint::from(d))
        + &q_minus_1 * &ball_count * p.get()
        + singles.pow(d as u32);
    if work > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { needed: work.to_string(), budget });
    }

    let mut outcomes: Vec<CheckOutcome> =
        GENERATION_TAGS.into_iter().map(CheckOutcome::new).collect();
    let (left, right) = outcomes.split_at_mut(2);
    let [span, linearity] = left else { unreachable!() };
    let [closure, surjectivity] = right else { unreachable!() };

    let ball_elements: Vec<GroupElement> = enumerate_ball(p, ball, budget)?.collect();

    // Sums of up to d weight-one elements stay within radius d; checked
    // over all tuples with repetition.
    let weight_one: Vec<GroupElement> = enumerate_ball(p, Ball::new(scale, 1), budget)?.collect();
    let target = Ball::new(scale, d as u64);
    let mut idx = vec![0usize; d];
    loop {
        let mut sum = GroupElement::zero(p, scale).unwrap();
        for &i in &idx {
            sum = &sum + &weight_one[i];
        }
        closure.check(sum.weight() <= d as u64 && in_u(&sum, target), || {
            format!("sum of {idx:?} has weight {}", sum.weight())
        });
        let mut pos = d;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < weight_one.len() {
                break;
            }
            idx[pos] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }

    // Patterns commute with scalars, functional by functional.
    let q1 = q_minus_1.to_u64().expect("bounded by budget");
    for fi in 1..=q1 {
        let f = Functional::new(GroupElement::from_index(p, scale, fi).expect("in range"));
        for u in &ball_elements {
            let fu = u64::from(f.eval(u));
            for lambda in 0..p.get() {
                let scaled = u.scalar_mul(FieldValue::new(p, lambda).unwrap());
                linearity.check(u64::from(f.eval(&scaled)) == lambda * fu % p.get(), || {
                    format!("f={f} u={u} lambda={lambda}")
                });
            }
        }
    }

    let mut systems: u64 = 0;
    if !force_general && p.get() == 2 && scale <= 5 && d <= 2 {
        systems = p2_systems_scan(
            p,
            scale,
            d,
            &ball_elements,
            span,
            surjectivity,
        );
    } else {
        let patterns = p.get().pow(d as u32) as usize;
        for sys in enumerate_systems(p, scale, d, budget)? {
            systems += 1;
            // The singleton image of digit t is column t of the
            // coefficient matrix, and column rank equals row rank.
            let coeff_rows: Vec<Vec<u8>> = sys
                .functionals()
                .iter()
                .map(|f| f.coeffs().to_digits())
                .collect();
            span.check(rank(p, coeff_rows) == d, || {
                format!("system={sys} singleton images fail to span")
            });
            let mut covered = vec![false; patterns];
            let mut left = patterns;
            for u in &ball_elements {
                let i = sys.pattern_index(u) as usize;
                if !covered[i] {
                    covered[i] = true;
                    left -= 1;
                    if left == 0 {
                        break;
                    }
                }
            }
            surjectivity.check(left == 0, || {
                let missing = covered.iter().position(|&c| !c).unwrap();
                format!("system={sys} misses pattern index {missing} at radius {radius}")
            });
        }
    }

    Ok(GenerationReport {
        prime: p.get(),
        scale,
        dimension: d,
        systems,
        outcomes,
    })
}

/// Packed scan over one- and two-functional systems at small scales.
fn p2_systems_scan(
    p: Prime,
    scale: u32,
    d: usize,
    ball_elements: &[GroupElement],
    span: &mut CheckOutcome,
    surjectivity: &mut CheckOutcome,
) -> u64 {
    let q = group_size(p, scale).expect("packed scale");
    let codes: Vec<u64> = ball_elements.iter().map(GroupElement::p2_bits).collect();
    let render = |f: u64| GroupElement::from_index(p, scale, f).expect("in range");
    let mut systems = 0u64;

    if d == 1 {
        for f in 1..q {
            systems += 1;
            span.check(f != 0, || format!("f={} is zero", render(f)));
            let mut need = 0b11u8;
            for &u in &codes {
                need &= !(1 << ((f & u).count_ones() & 1));
                if need == 0 {
                    break;
                }
            }
            surjectivity.check(need == 0, || {
                format!("f={} misses value {}", render(f), need.trailing_zeros())
            });
        }
        return systems;
    }

    for a in 1..q {
        for b in a + 1..q {
            systems += 1;
            // Digit classes by image pair; spanning needs two distinct
            // nonzero image vectors among the singletons.
            let m10 = a & !b;
            let m01 = !a & b;
            let m11 = a & b;
            let classes =
                usize::from(m10 != 0) + usize::from(m01 != 0) + usize::from(m11 != 0);
            span.check(classes >= 2, || {
                format!("a={} b={} singleton images collinear", render(a), render(b))
            });
            let mut need = 0b1111u8;
            for &u in &codes {
                let pat = (((a & u).count_ones() & 1) << 1) | ((b & u).count_ones() & 1);
                need &= !(1 << pat);
                if need == 0 {
                    break;
                }
            }
            surjectivity.check(need == 0, || {
                format!(
                    "a={} b={} misses pattern {:02b}",
                    render(a),
                    render(b),
                    need.trailing_zeros()
                )
            });
        }
    }
    systems
}
