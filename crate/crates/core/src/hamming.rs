//! Hamming balls around the constants at a fixed scale.
//!
//! `Ball { scale: n, radius: k }` denotes the scale-`n` elements with at
//! most `k` nonzero digits. The translate by the all-ones element (the ball
//! around 1) is what the avoidance checks use; membership tests accept
//! elements at any scale, treating a finer-scale element as a member
//! exactly when it is the embedding of one.

use crate::error::{Error, Result};
use crate::field::{FieldValue, Prime};
use crate::field_group::GroupElement;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;

/// A radius-bounded ball at an explicit scale. Radii larger than `2^scale`
/// behave as `2^scale` (the whole scale-`n` group).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub scale: u32,
    pub radius: u64,
}

impl Ball {
    pub fn new(scale: u32, radius: u64) -> Ball {
        Ball { scale, radius }
    }

    #[inline]
    fn clamped_radius(self) -> u64 {
        self.radius.min(1u64 << self.scale)
    }
}

/// Membership in the ball around 0. An element at a finer scale belongs
/// iff it is constant on scale-`n` cylinders and its block weight is within
/// the radius; an element at a coarser scale is embedded first.
pub fn in_u(g: &GroupElement, ball: Ball) -> bool {
    let n = ball.scale;
    if g.scale() <= n {
        // Embedding multiplies the weight by the repetition factor.
        g.weight() << (n - g.scale()) <= ball.clamped_radius()
    } else {
        match g.compress(n) {
            Ok(base) => base.weight() <= ball.clamped_radius(),
            Err(_) => false,
        }
    }
}

/// Membership in the ball around the all-ones element.
pub fn in_v(g: &GroupElement, ball: Ball) -> bool {
    let p = g.prime();
    let minus_one = (p.get() - 1) as u8;
    in_u(&g.add_constant(minus_one), ball)
}

/// Membership in a union of balls, each translated by `shift * 1`.
pub fn in_s_union(g: &GroupElement, balls: &[Ball], shift: FieldValue) -> bool {
    assert_eq!(g.prime(), shift.prime(), "mismatched moduli");
    let recentered = g.add_constant(shift.neg().value());
    balls.iter().any(|&b| in_u(&recentered, b))
}

/// Exact number of elements in the ball: `sum_j C(2^n, j) (p-1)^j` for
/// `j <= min(radius, 2^n)`.
pub fn ball_size(p: Prime, ball: Ball) -> BigUint {
    let n_digits = 1u64 << ball.scale;
    let nonzero = BigUint::from(p.get() - 1);
    let mut total = BigUint::from(0u32);
    for j in 0..=ball.clamped_radius() {
        let ways = num_integer::binomial(BigUint::from(n_digits), BigUint::from(j));
        total += ways * nonzero.pow(j as u32);
    }
    total
}

/// Streams the ball around 0 in a fixed order: weight ascending, support
/// positions lexicographic, then nonzero values as a base-(p-1) odometer.
pub fn enumerate_ball(p: Prime, ball: Ball, budget: u64) -> Result<BallIter> {
    let size = ball_size(p, ball);
    if size > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            needed: size.to_string(),
            budget,
        });
    }
    Ok(BallIter {
        p,
        ball,
        weight: 0,
        support: Vec::new(),
        values: Vec::new(),
        fresh_weight: true,
        done: false,
    })
}

pub struct BallIter {
    p: Prime,
    ball: Ball,
    weight: u64,
    support: Vec<u64>,
    values: Vec<u8>,
    fresh_weight: bool,
    done: bool,
}

impl BallIter {
    fn emit(&self) -> GroupElement {
        let mut digits = vec![0u8; 1usize << self.ball.scale];
        for (pos, val) in self.support.iter().zip(&self.values) {
            digits[*pos as usize] = *val;
        }
        GroupElement::from_digits(self.p, self.ball.scale, &digits).unwrap()
    }

    /// Advances the nonzero-value odometer; false when it wraps.
    fn bump_values(&mut self) -> bool {
        let top = (self.p.get() - 1) as u8;
        for v in self.values.iter_mut().rev() {
            if *v == top {
                *v = 1;
            } else {
                *v += 1;
                return true;
            }
        }
        false
    }

    /// Advances the support combination; false when exhausted.
    fn bump_support(&mut self) -> bool {
        let n = 1u64 << self.ball.scale;
        let j = self.support.len();
        for i in (0..j).rev() {
            if self.support[i] < n - (j - i) as u64 {
                self.support[i] += 1;
                for t in i + 1..j {
                    self.support[t] = self.support[t - 1] + 1;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for BallIter {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        if self.done {
            return None;
        }
        if self.fresh_weight {
            self.support = (0..self.weight).collect();
            self.values = vec![1; self.weight as usize];
            self.fresh_weight = false;
            return Some(self.emit());
        }
        if self.bump_values() {
            return Some(self.emit());
        }
        if self.bump_support() {
            self.values.fill(1);
            return Some(self.emit());
        }
        if self.weight < self.ball.clamped_radius() {
            self.weight += 1;
            self.fresh_weight = true;
            return self.next();
        }
        self.done = true;
        None
    }
}

/// Draws a uniform element of the ball around 0: the weight is chosen with
/// probability proportional to its layer size, then support and values are
/// uniform.
pub fn sample_ball<R: Rng>(p: Prime, ball: Ball, rng: &mut R) -> GroupElement {
    let n_digits = 1u64 << ball.scale;
    let k = ball.clamped_radius();
    let nonzero = BigUint::from(p.get() - 1);
    let layer_sizes: Vec<f64> = (0..=k)
        .map(|j| {
            let ways = num_integer::binomial(BigUint::from(n_digits), BigUint::from(j));
            (ways * nonzero.pow(j as u32)).to_f64().unwrap_or(f64::MAX)
        })
        .collect();
    let total: f64 = layer_sizes.iter().sum();
    let mut r = rng.random::<f64>() * total;
    let mut weight = k;
    for (j, w) in layer_sizes.iter().enumerate() {
        if r < *w {
            weight = j as u64;
            break;
        }
        r -= w;
    }
    let mut digits = vec![0u8; n_digits as usize];
    let support = rand::seq::index::sample(rng, n_digits as usize, weight as usize);
    for pos in support {
        digits[pos] = rng.random_range(1..p.get()) as u8;
    }
    GroupElement::from_digits(p, ball.scale, &digits).unwrap()
}
