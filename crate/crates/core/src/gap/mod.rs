//! Gap detection, clustering into independent gap sets and decomposition of
//! the uncovered region into convex primitives.
//!
//! On the periodic square every gap triangle with `Π(t) > ε` witnesses an
//! uncovered point at its power center. On bounded domains a power center may
//! fall outside the domain, so maximality additionally inspects the power
//! cells that reach the boundary (see [`clip_boundary_gaps`]).

mod primitive;
mod state;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{SamplingDomain, SegmentIndex};
use crate::geom::{power_at, side_of, Point2, Side, WeightedPoint};
use crate::polygon::{area, clip_convex, clip_halfplane, HalfPlane};
use crate::predicates::compare_dist_sum;
use crate::triangulation::{RegularTriangulation, TriangleRef, NONE};

pub use primitive::{clip_boundary_gaps, extract_primitives, BoundaryGap};
pub use state::GapState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("NotNeighbors: triangles {0:?} and {1:?} share no edge")]
    NotNeighbors(TriangleRef, TriangleRef),
    #[error("StaleReference: triangle {0:?} no longer exists")]
    StaleReference(TriangleRef),
    #[error("DegeneratePrimitive: gap primitive of {0:?} has area {1:e}")]
    DegeneratePrimitive(TriangleRef, f64),
    #[error("InvalidPolygon: {0}")]
    InvalidPolygon(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTriangle {
    pub tri: TriangleRef,
    pub power_center: Point2,
    pub power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    /// Short edge with the power centers on opposite sides: the disks seal
    /// the edge, but the gaps on both sides still interact.
    Boundary,
    InnerOpposite,
    InnerSameSide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexTag {
    DiskDiskIntersection,
    DiskEdgeIntersection,
    PowerCenter,
    AuxiliarySplit,
}

/// Convex ccw polygon with 3 to 6 vertices covering one connected piece of
/// the uncovered part of its owner triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapPrimitive {
    pub owner: TriangleRef,
    pub vertices: Vec<Point2>,
    pub tags: Vec<VertexTag>,
}

impl GapPrimitive {
    pub fn area(&self) -> f64 {
        area(&self.vertices)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependentGapSet {
    pub id: usize,
    /// Member gap triangles, ascending.
    pub triangles: Vec<TriangleRef>,
    /// Indices into the primitive list returned alongside.
    pub primitives: Vec<usize>,
    pub area: f64,
}

/// Default gap tolerance `1e-12 · r_min²`.
pub fn default_epsilon(r_min: f64) -> f64 {
    1e-12 * r_min * r_min
}

/// Domain data shared by the gap routines.
#[derive(Clone, Debug)]
pub struct GapContext {
    pub domain: SamplingDomain,
    pub segments: Option<SegmentIndex>,
    pub epsilon: f64,
}

impl GapContext {
    pub fn new(domain: &SamplingDomain, epsilon: f64) -> Self {
        let segments = if domain.is_periodic() { None } else { Some(SegmentIndex::new(domain)) };
        GapContext { domain: domain.clone(), segments, epsilon }
    }
}

pub(crate) fn gap_triangle(t: &RegularTriangulation, idx: u32) -> GapTriangle {
    let r = t.tref(idx);
    GapTriangle { tri: r, power_center: t.tri_center(r), power: t.tri_power(r) }
}

/// Triangles whose power exceeds `epsilon` and whose power center lies in
/// the domain, in ascending index order. On the periodic square these are
/// the exposed triangles with `Π(t) > ε`.
pub fn detect_gaps(t: &RegularTriangulation, domain: &SamplingDomain, epsilon: f64) -> Vec<GapTriangle> {
    if t.is_periodic() {
        return t.triangles().into_iter().filter(|&r| t.tri_power(r) > epsilon).map(|r| gap_triangle(t, r.index)).collect();
    }
    t.triangles_with_frame()
        .into_iter()
        .filter(|&r| t.tri_power(r) > epsilon && domain.contains(t.tri_center(r)))
        .map(|r| gap_triangle(t, r.index))
        .collect()
}

/// Whether no uncovered point of the domain remains (up to `epsilon`).
pub fn is_maximal(t: &RegularTriangulation, ctx: &GapContext) -> bool {
    if !detect_gaps(t, &ctx.domain, ctx.epsilon).is_empty() {
        return false;
    }
    t.is_periodic() || clip_boundary_gaps(t, ctx).map(|g| g.is_empty()).unwrap_or(false)
}

fn shared_edge(t: &RegularTriangulation, a: u32, b: u32) -> Option<(u32, u32)> {
    let ta = &t.tris[a as usize];
    let i = (0..3).find(|&i| ta.n[i] == b)?;
    Some((ta.v[(i + 1) % 3], ta.v[(i + 2) % 3]))
}

/// Connectivity class of the edge shared by two triangles.
pub fn classify_edge(t: &RegularTriangulation, t0: TriangleRef, t1: TriangleRef) -> Result<EdgeClass, GapError> {
    for r in [t0, t1] {
        if !t.is_live(r) {
            return Err(GapError::StaleReference(r));
        }
    }
    let (a, b) = shared_edge(t, t0.index, t1.index).ok_or(GapError::NotNeighbors(t0, t1))?;
    Ok(classify_raw(t, a, b, t0.index, t1.index))
}

pub(crate) fn classify_raw(t: &RegularTriangulation, a: u32, b: u32, t0: u32, t1: u32) -> EdgeClass {
    let (pa, wa) = t.wp(a);
    let (pb, wb) = t.wp(b);
    let long = compare_dist_sum(pa, pb, wa.sqrt(), wb.sqrt()) == Ordering::Greater;
    let s0 = side_of((pa, pb), t.tris[t0 as usize].center).unwrap_or(Side::OnLine);
    let s1 = side_of((pa, pb), t.tris[t1 as usize].center).unwrap_or(Side::OnLine);
    let opposite = s0 != s1 || s0 == Side::OnLine;
    match (long, opposite) {
        (true, true) => EdgeClass::InnerOpposite,
        (false, true) => EdgeClass::Boundary,
        (_, false) => EdgeClass::InnerSameSide,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }

    /// Groups as sorted member lists, ordered by their smallest member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            let k = *by_root.entry(r).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[k].push(i);
        }
        out
    }
}

fn check_live(t: &RegularTriangulation, gaps: &[GapTriangle]) -> Result<HashMap<u32, usize>, GapError> {
    let mut pos = HashMap::with_capacity(gaps.len());
    for (k, g) in gaps.iter().enumerate() {
        if !t.is_live(g.tri) {
            return Err(GapError::StaleReference(g.tri));
        }
        pos.insert(g.tri.index, k);
    }
    Ok(pos)
}

/// Index of the exposed representative of a raw triangle.
fn exposed(t: &RegularTriangulation, idx: u32) -> u32 {
    if !t.is_periodic() {
        return idx;
    }
    let r = t.tref(idx);
    if t.is_canonical(r) {
        idx
    } else {
        t.canonical(r).index
    }
}

fn sort_gaps(gaps: &[GapTriangle]) -> Vec<GapTriangle> {
    let mut g = gaps.to_vec();
    g.sort_by_key(|x| x.tri.index);
    g
}

/// Groups gap triangles that share a vertex. Sets are ordered by their
/// smallest triangle index and numbered from 0.
pub fn cluster_igs(gaps: &[GapTriangle], t: &RegularTriangulation) -> Result<Vec<Vec<GapTriangle>>, GapError> {
    let gaps = sort_gaps(gaps);
    let pos = check_live(t, &gaps)?;
    let mut uf = UnionFind::new(gaps.len());
    for (k, g) in gaps.iter().enumerate() {
        for &v in &t.tris[g.tri.index as usize].v {
            for s in t.star(v) {
                if s == g.tri.index {
                    continue;
                }
                if let Some(&j) = pos.get(&exposed(t, s)) {
                    uf.union(k, j);
                }
            }
        }
    }
    Ok(uf.groups().into_iter().map(|m| m.into_iter().map(|i| gaps[i]).collect()).collect())
}

/// Groups gap triangles joined across edges that are not of the
/// [`EdgeClass::Boundary`] kind.
pub fn connected_components(gaps: &[GapTriangle], t: &RegularTriangulation) -> Result<Vec<Vec<GapTriangle>>, GapError> {
    let gaps = sort_gaps(gaps);
    let pos = check_live(t, &gaps)?;
    let mut uf = UnionFind::new(gaps.len());
    for (k, g) in gaps.iter().enumerate() {
        let tri = &t.tris[g.tri.index as usize];
        for i in 0..3 {
            let n = tri.n[i];
            if n == NONE {
                continue;
            }
            let Some(&j) = pos.get(&exposed(t, n)) else { continue };
            let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
            if classify_raw(t, a, b, g.tri.index, n) != EdgeClass::Boundary {
                uf.union(k, j);
            }
        }
    }
    Ok(uf.groups().into_iter().map(|m| m.into_iter().map(|i| gaps[i]).collect()).collect())
}

/// Sampling candidates on bounded domains: keeps a triangle when some point
/// of it inside the domain is uncovered by its own three disks. Every
/// uncovered domain point lies in a kept triangle.
pub(crate) fn touches_uncovered_domain(t: &RegularTriangulation, idx: u32, ctx: &GapContext) -> bool {
    let Some(segs) = ctx.segments.as_ref() else { return true };
    let tri = &t.tris[idx as usize];
    let p: Vec<(Point2, f64)> = tri.v.iter().map(|&v| t.wp(v)).collect();
    let poly = vec![p[0].0, p[1].0, p[2].0];
    for i in 0..3 {
        // Region of the triangle where vertex i has the smallest power.
        let mut q = poly.clone();
        for j in 0..3 {
            if j == i {
                continue;
            }
            // pow_i(x) <= pow_j(x)  <=>  2 (p_j - p_i)·x <= |p_j|² - w_j - |p_i|² + w_i
            let n = (p[j].0 - p[i].0) * 2.0;
            let off = p[j].0.norm2() - p[j].1 - p[i].0.norm2() + p[i].1;
            q = clip_halfplane(&q, &HalfPlane { normal: n, offset: off });
            if q.len() < 3 {
                break;
            }
        }
        if q.len() < 3 {
            continue;
        }
        let wi = WeightedPoint::new(p[i].0, p[i].1);
        let frame = t.verts[tri.v[i] as usize].site == NONE;
        for x in segs.convex_cut_points(&ctx.domain, &q) {
            if frame || power_at(x, wi) > ctx.epsilon {
                return true;
            }
        }
    }
    false
}

/// Detection, clustering and extraction in one pass. Primitives come out
/// grouped by gap set; degenerate ones are dropped and counted.
#[derive(Clone, Debug, Default)]
pub struct GapAnalysis {
    pub primitives: Vec<GapPrimitive>,
    pub sets: Vec<IndependentGapSet>,
    pub dropped: usize,
}

pub fn analyze(t: &RegularTriangulation, ctx: &GapContext, gaps: &[GapTriangle]) -> Result<GapAnalysis, GapError> {
    let gaps: Vec<GapTriangle> = if t.is_periodic() {
        gaps.to_vec()
    } else {
        gaps.iter().copied().filter(|g| touches_uncovered_domain(t, g.tri.index, ctx)).collect()
    };
    let sets = cluster_igs(&gaps, t)?;
    let clip = if t.is_periodic() { None } else { Some(ctx.domain.bbox()) };
    let extract = |members: &Vec<GapTriangle>| -> (Vec<GapPrimitive>, usize) {
        let mut out = Vec::with_capacity(members.len());
        let mut dropped = 0;
        for g in members {
            match primitive::extract_clipped(t, g.tri, clip) {
                Ok(p) => out.extend(p),
                Err(_) => dropped += 1,
            }
        }
        (out, dropped)
    };
    #[cfg(feature = "parallel")]
    let per_set: Vec<(Vec<GapPrimitive>, usize)> = {
        use rayon::prelude::*;
        sets.par_iter().map(extract).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_set: Vec<(Vec<GapPrimitive>, usize)> = sets.iter().map(extract).collect();

    let mut out = GapAnalysis::default();
    for (id, (members, (prims, dropped))) in sets.iter().zip(per_set).enumerate() {
        out.dropped += dropped;
        let start = out.primitives.len();
        let area: f64 = prims.iter().map(|p| p.area()).sum();
        out.primitives.extend(prims);
        out.sets.push(IndependentGapSet {
            id,
            triangles: members.iter().map(|g| g.tri).collect(),
            primitives: (start..out.primitives.len()).collect(),
            area,
        });
    }
    if out.dropped > 0 {
        log::debug!("dropped {} degenerate gap primitives", out.dropped);
    }
    Ok(out)
}

/// Detects, clusters and extracts all primitives of the current state.
pub fn extract_all_primitives(
    t: &RegularTriangulation,
    ctx: &GapContext,
) -> Result<(Vec<GapPrimitive>, Vec<IndependentGapSet>), GapError> {
    let state = GapState::new(t, ctx.epsilon);
    let a = analyze(t, ctx, &state.gaps())?;
    Ok((a.primitives, a.sets))
}

/// Area of `poly ∩ domain` for a convex ccw polygon.
pub(crate) fn area_in_domain(domain: &SamplingDomain, poly: &[Point2]) -> f64 {
    if domain.is_periodic() {
        return area(poly);
    }
    let rings = domain.rings();
    let mut a = area(&clip_convex(&rings[0], poly));
    for h in &rings[1..] {
        a -= area(&clip_convex(h, poly));
    }
    a.max(0.0)
}

#[cfg(test)]
mod tests;

