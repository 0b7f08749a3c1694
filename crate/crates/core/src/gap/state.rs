use std::collections::BTreeMap;

use crate::triangulation::{Journal, RegularTriangulation};

use super::{gap_triangle, GapError, GapTriangle};

/// Gap triangles of a triangulation, kept current from its mutation journal.
///
/// On the periodic square the state holds the exposed triangles with
/// `Π(t) > ε`. On bounded domains it holds every live triangle with
/// `Π(t) > ε`, frame triangles included; [`super::analyze`] narrows these to
/// the ones that reach uncovered domain points.
#[derive(Clone, Debug, PartialEq)]
pub struct GapState {
    epsilon: f64,
    gaps: BTreeMap<u32, GapTriangle>,
    version: u64,
}

impl GapState {
    pub fn new(t: &RegularTriangulation, epsilon: f64) -> Self {
        let mut gaps = BTreeMap::new();
        for r in t.triangles_with_frame() {
            if t.tri_power(r) > epsilon {
                gaps.insert(r.index, gap_triangle(t, r.index));
            }
        }
        GapState { epsilon, gaps, version: t.version() }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Gap triangles in ascending index order.
    pub fn gaps(&self) -> Vec<GapTriangle> {
        self.gaps.values().copied().collect()
    }

    /// Re-evaluates only the triangles named in the journal.
    pub fn recompute_local(&mut self, t: &RegularTriangulation, journal: &Journal) -> Result<(), GapError> {
        for d in &journal.destroyed {
            if self.gaps.get(&d.index).is_some_and(|g| g.tri == *d) {
                self.gaps.remove(&d.index);
            }
        }
        for c in &journal.created {
            if !t.is_live(*c) {
                continue;
            }
            let keep = if t.is_periodic() { t.is_canonical(*c) } else { true };
            if keep && t.tri_power(*c) > self.epsilon {
                self.gaps.insert(c.index, gap_triangle(t, c.index));
            }
        }
        self.version = t.version();
        self.validate(t)
    }

    /// Fails when an entry refers to a triangle that no longer exists.
    pub fn validate(&self, t: &RegularTriangulation) -> Result<(), GapError> {
        match self.gaps.values().find(|g| !t.is_live(g.tri)) {
            Some(g) => Err(GapError::StaleReference(g.tri)),
            None => Ok(()),
        }
    }

    pub fn version(&self) -> u64 {
        self.version
    }
}
