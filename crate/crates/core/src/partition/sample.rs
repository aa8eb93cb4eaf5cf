//! Uniform sampling from a cell without enumerating it.
//!
//! A cell member decomposes uniquely: its blocks at the first cut are
//! members of tail cells, and the pattern of their labels is itself a
//! member of the corresponding single-level cell. Since tail cells all
//! have the same size, drawing the label pattern uniformly and then each
//! block uniformly (independently, given its label) is uniform over the
//! whole cell. Iterating this turns a chain of small single-level tables,
//! one per level, into a sampler for cells far too large to enumerate.

use super::{CellLabel, Classifier, PartitionSpec};
use crate::error::{Error, Result};
use crate::field_group::GroupRange;
use crate::rng::TaskRng;
use crate::GroupElement;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct CellSampler {
    spec: PartitionSpec,
    // tables[i][x]: digit vectors of the members of cell x of the
    // single-level spec (block scale of level i, margin of level i).
    tables: Vec<Vec<Vec<Vec<u8>>>>,
}

impl CellSampler {
    /// Tabulates the per-level single-level cells. Errors if any level is
    /// vacuous (its cells are empty, so nothing can be sampled) or if a
    /// table would require enumerating more than `budget` elements.
    pub fn new(spec: &PartitionSpec, budget: u64) -> Result<CellSampler> {
        if let Some(&level) = spec.vacuous_levels().first() {
            return Err(Error::VacuousLevel {
                level,
                margin: spec.levels()[level].margin,
                block_scale: spec.block_scale(level),
            });
        }
        let p = spec.prime();
        let mut tables = Vec::with_capacity(spec.depth());
        for i in 0..spec.depth() {
            let block = spec.block_scale(i);
            let margin = spec.levels()[i].margin;
            // Relaxed construction keeps margin-0 diagnostic specs usable.
            let single = PartitionSpec::relaxed(p, &[(block, margin)])?;
            let classifier = Classifier::new(single);
            let mut cells: Vec<Vec<Vec<u8>>> = vec![Vec::new(); p.get() as usize];
            for g in GroupRange::all(p, block, budget)? {
                if let CellLabel::Cell(x) = classifier.classify(&g).unwrap() {
                    cells[usize::from(x)].push(g.to_digits());
                }
            }
            tables.push(cells);
        }
        Ok(CellSampler { spec: spec.clone(), tables })
    }

    pub fn spec(&self) -> &PartitionSpec {
        &self.spec
    }

    /// Size of the level-`i` single-level cell table for label `x`.
    pub fn table_len(&self, i: usize, x: u8) -> usize {
        self.tables[i][usize::from(x)].len()
    }

    /// Draws a uniform member of the cell with the given index.
    pub fn sample(&self, x: u8, rng: &mut TaskRng) -> GroupElement {
        assert!(u64::from(x) < self.spec.prime().get(), "cell index out of range");
        let mut pattern: Vec<u8> = vec![x];
        for table in &self.tables {
            let mut next = Vec::with_capacity(pattern.len() * table[0].len().max(1));
            for &label in &pattern {
                let members = &table[usize::from(label)];
                let pick = &members[rng.random_range(0..members.len())];
                next.extend_from_slice(pick);
            }
            pattern = next;
        }
        GroupElement::from_digits(self.spec.prime(), self.spec.scale(), &pattern).unwrap()
    }
}
