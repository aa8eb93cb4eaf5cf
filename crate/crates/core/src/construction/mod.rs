//! The avoiding set and the forbidden differences it stays clear of.
//!
//! Fix levels `(n_1, m_1, k_1), ..., (n_L, m_L, k_L)` with the scales
//! increasing and each shift radius `k_j` strictly below the margin `m_j`,
//! and a residue set `E` that escapes itself under adding one (the default
//! is the odd residues). Two sets are built from this data:
//!
//! - `S`: the union over levels of the radius-`k_j` balls around the
//!   all-ones element at scale `n_j`;
//! - `A`: the union over prefixes `l <= L` of the cells with index in `E`
//!   of the prefix partition, each viewed inside finer scales through the
//!   digit-repetition embedding.
//!
//! Adding `s = 1 + u` from `S` to a member of cell `x` lands in cell
//! `x + 1` of the margin-reduced partition, and `x + 1` never lies in `E`;
//! reduced cells stay disjoint, so `(A + S)` misses `A` and no difference
//! of two members of `A` falls in `S`. [`verify_disjointness`] checks that
//! chain on concrete pairs, [`density_report`] accounts for the share of
//! each truncation that `A` occupies, and [`difference_threshold_brute`]
//! establishes the complementary fact by brute force: sets denser than
//! [`delta`] have differences covering the whole group.

mod brute;
mod density;
mod verify;

pub use brute::{difference_threshold_brute, window_density, ThresholdReport, THRESHOLD_TAGS};
pub use density::{density_report, DensityReport, LevelDensity};
pub use verify::{
    verify_disjointness, verify_shifted_avoidance, DisjointnessReport, DISJOINTNESS_TAGS,
};

use crate::error::{Error, Result};
use crate::field::{FieldSubset, FieldValue, Prime};
use crate::field_group::GroupElement;
use crate::hamming::{in_s_union, Ball};
use crate::partition::{CellLabel, Classifier, PartitionSpec};
use num_rational::Ratio;
use std::fmt;

/// Density threshold for full difference sets: `1/2` at `p = 2` and
/// `(p-1)/(2p)` at odd `p`; equals `|E|/p` for the default residue set.
pub fn delta(p: Prime) -> Ratio<u64> {
    if p.get() == 2 {
        Ratio::new(1, 2)
    } else {
        Ratio::new(p.get() - 1, 2 * p.get())
    }
}

/// The odd residues `{1, 3, ...}`, the default choice of `E`.
pub fn default_residues(p: Prime) -> FieldSubset {
    FieldSubset::from_members(p, (1..p.get()).step_by(2)).unwrap()
}

/// One level of the construction: a partition level plus the radius of the
/// ball forbidden at its scale.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct LevelParams {
    pub scale: u32,
    pub margin: u64,
    pub radius: u64,
}

/// Validated parameters: levels, the residue set `E`, and an optional
/// density slack used by [`density_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionParams {
    spec: PartitionSpec,
    radii: Vec<u64>,
    e: FieldSubset,
    epsilon: Option<Ratio<u64>>,
}

impl ConstructionParams {
    /// Builds parameters with the default residue set.
    pub fn new(p: Prime, levels: &[(u32, u64, u64)]) -> Result<ConstructionParams> {
        ConstructionParams::with_residues(p, levels, default_residues(p))
    }

    pub fn with_residues(
        p: Prime,
        levels: &[(u32, u64, u64)],
        e: FieldSubset,
    ) -> Result<ConstructionParams> {
        let spec_levels: Vec<(u32, u64)> = levels.iter().map(|&(n, m, _)| (n, m)).collect();
        let spec = PartitionSpec::new(p, &spec_levels)?;
        for &(n, m, k) in levels {
            if k >= m {
                return Err(Error::InvalidSpec(format!(
                    "shift radius {k} must stay below the margin {m} at scale {n}"
                )));
            }
        }
        if e.prime() != p {
            return Err(Error::InvalidSpec(format!(
                "residue set modulus {} does not match {p}",
                e.prime()
            )));
        }
        if !e.translate(1).intersect(e).is_empty() {
            return Err(Error::InvalidSpec(format!(
                "residue set {e} must be disjoint from its own shift by one"
            )));
        }
        Ok(ConstructionParams {
            spec,
            radii: levels.iter().map(|&(_, _, k)| k).collect(),
            e,
            epsilon: None,
        })
    }

    /// Sets the slack for the density target `|E| (1 - epsilon) / p`.
    pub fn with_epsilon(mut self, epsilon: Ratio<u64>) -> Result<ConstructionParams> {
        if epsilon > Ratio::new(1, 1) {
            return Err(Error::InvalidSpec(format!(
                "density slack {epsilon} exceeds one"
            )));
        }
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    /// Named desk-scale parameter sets; see [`ConstructionParams::preset_names`].
    /// The margins and thresholds interact tightly enough that arbitrary
    /// small parameters usually yield empty cells, so demos start here.
    pub fn preset(name: &str) -> Result<ConstructionParams> {
        let p2 = Prime::new(2).unwrap();
        let p3 = Prime::new(3).unwrap();
        match name {
            "p2-exhaustive" => ConstructionParams::new(p2, &[(3, 2, 1)]),
            "p2-sampled" => ConstructionParams::new(p2, &[(3, 2, 1), (6, 2, 1)]),
            // Every cell of this one is empty (the margin window at block
            // scale 2 is unsatisfiable for p = 3); it demonstrates the
            // vacuous-level reporting path.
            "p3-exhaustive" => ConstructionParams::new(p3, &[(2, 2, 1)]),
            _ => Err(Error::Parse(format!(
                "unknown preset {name:?} (known: {})",
                ConstructionParams::preset_names().join(", ")
            ))),
        }
    }

    pub fn preset_names() -> [&'static str; 3] {
        ["p2-exhaustive", "p2-sampled", "p3-exhaustive"]
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.spec.prime()
    }

    /// The underlying partition levels (scales and margins).
    #[inline]
    pub fn spec(&self) -> &PartitionSpec {
        &self.spec
    }

    /// Ball radii, one per level.
    #[inline]
    pub fn radii(&self) -> &[u64] {
        &self.radii
    }

    #[inline]
    pub fn e(&self) -> FieldSubset {
        self.e
    }

    #[inline]
    pub fn epsilon(&self) -> Option<Ratio<u64>> {
        self.epsilon
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.spec.depth()
    }

    /// The outermost scale `n_L`.
    #[inline]
    pub fn scale(&self) -> u32 {
        self.spec.scale()
    }

    pub fn levels(&self) -> Vec<LevelParams> {
        self.spec
            .levels()
            .iter()
            .zip(&self.radii)
            .map(|(lv, &radius)| LevelParams {
                scale: lv.scale,
                margin: lv.margin,
                radius,
            })
            .collect()
    }

    /// The forbidden balls, one per level, centered at the all-ones element.
    pub fn balls(&self) -> Vec<Ball> {
        self.spec
            .levels()
            .iter()
            .zip(&self.radii)
            .map(|(lv, &k)| Ball::new(lv.scale, k))
            .collect()
    }

    /// Keeps the first `l` levels.
    pub fn truncate(&self, l: usize) -> ConstructionParams {
        assert!(l >= 1 && l <= self.depth());
        ConstructionParams {
            spec: self.spec.prefix(l),
            radii: self.radii[..l].to_vec(),
            e: self.e,
            epsilon: self.epsilon,
        }
    }

    /// `|E| / p` as an exact fraction; equals [`delta`] for the default `E`.
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(u64::from(self.e.len()), self.prime().get())
    }

    /// Levels whose cells are all empty; see [`PartitionSpec::vacuous_levels`].
    pub fn vacuous_levels(&self) -> Vec<usize> {
        self.spec.vacuous_levels()
    }
}

impl fmt::Display for ConstructionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels: Vec<String> = self
            .levels()
            .iter()
            .map(|lv| format!("{}:{}:{}", lv.scale, lv.margin, lv.radius))
            .collect();
        write!(f, "p={} levels={} e={}", self.prime(), levels.join(","), self.e)
    }
}

/// Membership tests for `A` and `S` at fixed parameters.
pub struct Construction {
    params: ConstructionParams,
    prefixes: Vec<Classifier>,
    balls: Vec<Ball>,
    one: FieldValue,
}

impl Construction {
    pub fn new(params: ConstructionParams) -> Construction {
        let prefixes = (1..=params.depth())
            .map(|l| Classifier::new(params.spec().prefix(l)))
            .collect();
        let balls = params.balls();
        let one = FieldValue::new(params.prime(), 1).unwrap();
        Construction { params, prefixes, balls, one }
    }

    #[inline]
    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    /// Whether `g` belongs to the truncated `A`: some prefix classifies it
    /// into a cell with index in `E`. An element finer than a prefix scale
    /// belongs through that prefix only if it is constant on the prefix
    /// scale's cylinders, which is how a scale-`n_l` set sits inside finer
    /// truncations.
    pub fn in_a(&self, g: &GroupElement) -> bool {
        self.witness_level(g).is_some()
    }

    /// The first prefix placing `g` in an `E`-indexed cell, with the index.
    pub fn witness_level(&self, g: &GroupElement) -> Option<(usize, u8)> {
        assert_eq!(g.prime(), self.params.prime(), "mismatched moduli");
        self.prefixes.iter().enumerate().find_map(|(l, c)| match c.classify(g) {
            Ok(CellLabel::Cell(x)) if self.params.e.contains(x) => Some((l, x)),
            _ => None,
        })
    }

    /// Whether `g` belongs to the truncated `S`, the union of the
    /// all-ones-centered balls of the levels.
    pub fn in_s(&self, g: &GroupElement) -> bool {
        in_s_union(g, &self.balls, self.one)
    }
}
