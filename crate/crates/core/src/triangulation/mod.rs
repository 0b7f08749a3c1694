//! Dynamic regular (weighted Delaunay) triangulation.
//!
//! Triangles are stored in flat arrays with neighbor `i` opposite vertex `i`.
//! The real sites are enclosed by four far away frame vertices of weight zero
//! so every operation happens strictly inside a fixed convex hull. Periodic
//! domains replicate each site into a 3×3 block of translates; only one copy
//! of every periodic triangle is exposed.

mod insert;
mod remove;

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{wrap_unit, SamplingDomain};
use crate::geom::{power_at, Point2, SiteId, WeightedPoint, WeightedSite};
use crate::polygon::clip_convex;
use crate::predicates::{orient2d, power_test};

pub(crate) const NONE: u32 = u32::MAX;

/// Tile offsets of the periodic copies; copy 0 is the fundamental cell.
pub(crate) const OFFSETS: [(i8, i8); 9] = [(0, 0), (-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriangulationError {
    #[error("RedundantSite: site {0} would be hidden")]
    RedundantSite(SiteId),
    #[error("OutsideDomain: {0} lies outside the triangulated region")]
    OutsideDomain(Point2),
    #[error("UnknownSite: {0}")]
    UnknownSite(SiteId),
    #[error("TooFewSites: the triangulation needs at least one site")]
    TooFewSites,
    #[error("ConflictError: sites {0} and {1} violate the separation invariant")]
    ConflictError(SiteId, SiteId),
    #[error("duplicate site id {0}")]
    DuplicateSiteId(SiteId),
    #[error("non-positive radius for site {0}")]
    InvalidRadius(SiteId),
}

/// Handle to a triangle slot together with the creation stamp of its
/// current occupant; stale once the slot is reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct TriangleRef {
    pub index: u32,
    pub stamp: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Triangle(TriangleRef),
    OutsideHull,
}

/// Read-only view of a triangle vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexView {
    pub index: u32,
    pub pos: Point2,
    pub weight: f64,
    /// `None` for frame vertices.
    pub site: Option<SiteId>,
    pub offset: (i8, i8),
}

impl VertexView {
    pub fn weighted(&self) -> WeightedPoint {
        WeightedPoint::new(self.pos, self.weight)
    }

    pub fn radius(&self) -> f64 {
        self.weight.sqrt()
    }
}

/// Created and destroyed triangles since the journal was last drained.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Journal {
    pub created: Vec<TriangleRef>,
    pub destroyed: Vec<TriangleRef>,
}

impl Journal {
    pub fn is_empty(&self) -> bool {
        self.created.is_empty() && self.destroyed.is_empty()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Vertex {
    pub pos: Point2,
    pub weight: f64,
    pub site: u32,
    pub offset: (i8, i8),
    pub tri: u32,
    pub alive: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Tri {
    pub v: [u32; 3],
    pub n: [u32; 3],
    pub stamp: u64,
    pub center: Point2,
    pub power: f64,
    pub alive: bool,
}

#[derive(Clone, Debug)]
struct SiteRecord {
    site: WeightedSite,
    verts: [u32; 9],
}

#[derive(Clone, Debug)]
pub struct RegularTriangulation {
    pub(crate) verts: Vec<Vertex>,
    free_verts: Vec<u32>,
    pub(crate) tris: Vec<Tri>,
    free_tris: Vec<u32>,
    sites: Vec<Option<SiteRecord>>,
    live_sites: usize,
    periodic: bool,
    bbox: (Point2, Point2),
    frame: [u32; 4],
    version: u64,
    next_stamp: u64,
    last: u32,
    journal: Journal,
    mark: Vec<u32>,
    mark_gen: u32,
    walk_rng: u64,
    last_walk_steps: usize,
}

impl RegularTriangulation {
    /// Frame only, no sites.
    pub fn empty(domain: &SamplingDomain) -> Self {
        let periodic = domain.is_periodic();
        let (lo, hi) = domain.bbox();
        let (flo, fhi) = if periodic { (Point2::new(-1.0, -1.0), Point2::new(2.0, 2.0)) } else { (lo, hi) };
        let ext = (fhi.x - flo.x).max(fhi.y - flo.y);
        let mid = (flo + fhi) * 0.5;
        let l = 16.0 * ext;
        let mut t = RegularTriangulation {
            verts: Vec::new(),
            free_verts: Vec::new(),
            tris: Vec::new(),
            free_tris: Vec::new(),
            sites: Vec::new(),
            live_sites: 0,
            periodic,
            bbox: (lo, hi),
            frame: [0; 4],
            version: 0,
            next_stamp: 0,
            last: 0,
            journal: Journal::default(),
            mark: Vec::new(),
            mark_gen: 0,
            walk_rng: 0x9E37_79B9_7F4A_7C15,
            last_walk_steps: 0,
        };
        let corners = [
            Point2::new(mid.x - l, mid.y - l),
            Point2::new(mid.x + l, mid.y - l),
            Point2::new(mid.x + l, mid.y + l),
            Point2::new(mid.x - l, mid.y + l),
        ];
        for (k, c) in corners.iter().enumerate() {
            t.frame[k] = t.alloc_vertex(*c, 0.0, NONE, (0, 0));
        }
        let [a, b, c, d] = t.frame;
        let t0 = t.new_tri([a, b, c]);
        let t1 = t.new_tri([a, c, d]);
        // t0 = (a,b,c): edge (c,a) is opposite b.
        t.tris[t0 as usize].n[1] = t1;
        // t1 = (a,c,d): edge (a,c) is opposite d.
        t.tris[t1 as usize].n[2] = t0;
        for v in [a, b, c] {
            t.verts[v as usize].tri = t0;
        }
        t.verts[d as usize].tri = t1;
        t.last = t0;
        t.journal = Journal::default();
        t
    }

    pub fn build(sites: &[WeightedSite], domain: &SamplingDomain) -> Result<Self, TriangulationError> {
        if sites.is_empty() {
            return Err(TriangulationError::TooFewSites);
        }
        let mut t = Self::empty(domain);
        let max_id = sites.iter().map(|s| s.id.0).max().unwrap() as usize;
        t.sites.resize(max_id + 1, None);
        for s in sites {
            if t.sites[s.id.0 as usize].is_some() {
                return Err(TriangulationError::DuplicateSiteId(s.id));
            }
            if s.radius() <= 0.0 {
                return Err(TriangulationError::InvalidRadius(s.id));
            }
            let mut s = *s;
            if t.periodic {
                s.center = Point2::new(wrap_unit(s.center.x), wrap_unit(s.center.y));
            }
            t.sites[s.id.0 as usize] = Some(SiteRecord { site: s, verts: [NONE; 9] });
        }
        // Spatially coherent order keeps walks short.
        let mut jobs: Vec<(u64, u32, u8)> = Vec::with_capacity(sites.len() * if t.periodic { 9 } else { 1 });
        let (lo, hi) = if t.periodic { (Point2::new(-1.0, -1.0), Point2::new(2.0, 2.0)) } else { t.bbox };
        for s in sites {
            let rec = t.sites[s.id.0 as usize].as_ref().unwrap();
            let copies = if t.periodic { 9 } else { 1 };
            for k in 0..copies {
                let p = translate(rec.site.center, OFFSETS[k]);
                jobs.push((hilbert_key(p, lo, hi), s.id.0, k as u8));
            }
        }
        jobs.sort_unstable();
        for (_, id, k) in jobs {
            let rec = t.sites[id as usize].as_ref().unwrap();
            let p = translate(rec.site.center, OFFSETS[k as usize]);
            let w = rec.site.weight();
            let start = t.last;
            let v = t.insert_vertex(p, w, id, OFFSETS[k as usize], start).map_err(|e| match e {
                TriangulationError::RedundantSite(_) => TriangulationError::RedundantSite(SiteId(id)),
                other => other,
            })?;
            t.sites[id as usize].as_mut().unwrap().verts[k as usize] = v;
        }
        t.live_sites = sites.len();
        t.version += 1;
        t.journal = Journal::default();
        Ok(t)
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn num_sites(&self) -> usize {
        self.live_sites
    }

    /// Fewer than three sites, or all sites collinear.
    pub fn is_degenerate(&self) -> bool {
        let pts: Vec<Point2> = self.sites().map(|s| s.center).collect();
        if self.periodic {
            return pts.is_empty();
        }
        if pts.len() < 3 {
            return true;
        }
        let (a, b) = (pts[0], pts[1]);
        pts[2..].iter().all(|&c| orient2d(a, b, c) == Ordering::Equal)
    }

    /// Steps taken by the most recent point-location walk.
    pub fn last_walk_steps(&self) -> usize {
        self.last_walk_steps
    }

    pub fn site(&self, id: SiteId) -> Option<&WeightedSite> {
        self.sites.get(id.0 as usize).and_then(|r| r.as_ref()).map(|r| &r.site)
    }

    pub fn sites(&self) -> impl Iterator<Item = &WeightedSite> + '_ {
        self.sites.iter().filter_map(|r| r.as_ref().map(|r| &r.site))
    }

    pub fn next_site_id(&self) -> SiteId {
        SiteId(self.sites.len() as u32)
    }

    pub fn take_journal(&mut self) -> Journal {
        std::mem::take(&mut self.journal)
    }

    pub fn clear_journal(&mut self) {
        self.journal = Journal::default();
    }

    // ----- allocation -----

    fn alloc_vertex(&mut self, pos: Point2, weight: f64, site: u32, offset: (i8, i8)) -> u32 {
        let v = Vertex { pos, weight, site, offset, tri: NONE, alive: true };
        if let Some(i) = self.free_verts.pop() {
            self.verts[i as usize] = v;
            i
        } else {
            self.verts.push(v);
            (self.verts.len() - 1) as u32
        }
    }

    pub(crate) fn wp(&self, v: u32) -> (Point2, f64) {
        let x = &self.verts[v as usize];
        (x.pos, x.weight)
    }

    pub(crate) fn new_tri(&mut self, v: [u32; 3]) -> u32 {
        self.next_stamp += 1;
        let wp = |i: usize| {
            let x = &self.verts[v[i] as usize];
            WeightedPoint::new(x.pos, x.weight)
        };
        let (a, b, c) = (wp(0), wp(1), wp(2));
        let center = crate::geom::power_center_unchecked(a, b, c);
        let power = power_at(center, a);
        let tri = Tri { v, n: [NONE; 3], stamp: self.next_stamp, center, power, alive: true };
        let idx = if let Some(i) = self.free_tris.pop() {
            self.tris[i as usize] = tri;
            i
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        };
        self.journal.created.push(TriangleRef { index: idx, stamp: self.next_stamp });
        idx
    }

    pub(crate) fn kill_tri(&mut self, t: u32) {
        let tri = &mut self.tris[t as usize];
        debug_assert!(tri.alive);
        tri.alive = false;
        self.journal.destroyed.push(TriangleRef { index: t, stamp: tri.stamp });
        self.free_tris.push(t);
    }

    pub(crate) fn next_mark(&mut self) -> u32 {
        self.mark_gen = self.mark_gen.wrapping_add(1);
        if self.mark_gen == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.mark_gen = 1;
        }
        self.mark_gen
    }

    /// Points neighbor slot of `t` across the directed edge `from → to`
    /// (in `t`'s ccw order) at `target`.
    pub(crate) fn link(&mut self, t: u32, from: u32, to: u32, target: u32) {
        if t == NONE {
            return;
        }
        let tri = &mut self.tris[t as usize];
        for s in 0..3 {
            if tri.v[(s + 1) % 3] == from && tri.v[(s + 2) % 3] == to {
                tri.n[s] = target;
                return;
            }
        }
        panic!("link: edge not found in triangle {t}");
    }

    pub(crate) fn index_in(&self, t: u32, v: u32) -> usize {
        let tri = &self.tris[t as usize];
        tri.v.iter().position(|&x| x == v).expect("vertex not in triangle")
    }

    // ----- point location -----

    /// Visibility walk towards `p` from triangle `start`. Returns the final
    /// triangle (containing `p` in its closure) or `NONE` when `p` leaves the
    /// frame.
    pub(crate) fn walk(&mut self, p: Point2, start: u32) -> u32 {
        let mut t = if start != NONE && (start as usize) < self.tris.len() && self.tris[start as usize].alive {
            start
        } else {
            self.any_live_tri()
        };
        let mut steps = 0usize;
        'outer: loop {
            self.walk_rng ^= self.walk_rng << 13;
            self.walk_rng ^= self.walk_rng >> 7;
            self.walk_rng ^= self.walk_rng << 17;
            let first = (self.walk_rng % 3) as usize;
            let tri = &self.tris[t as usize];
            for k in 0..3 {
                let i = (first + k) % 3;
                let a = self.verts[tri.v[(i + 1) % 3] as usize].pos;
                let b = self.verts[tri.v[(i + 2) % 3] as usize].pos;
                if orient2d(a, b, p) == Ordering::Less {
                    let nt = tri.n[i];
                    if nt == NONE {
                        self.last_walk_steps = steps;
                        return NONE;
                    }
                    t = nt;
                    steps += 1;
                    continue 'outer;
                }
            }
            self.last_walk_steps = steps;
            return t;
        }
    }

    fn any_live_tri(&self) -> u32 {
        if (self.last as usize) < self.tris.len() && self.tris[self.last as usize].alive {
            return self.last;
        }
        self.tris.iter().position(|t| t.alive).expect("triangulation has a live triangle") as u32
    }

    fn hint_index(&self, hint: Option<TriangleRef>) -> u32 {
        match hint {
            Some(h) if self.is_live(h) => h.index,
            _ => self.last,
        }
    }

    pub fn is_live(&self, t: TriangleRef) -> bool {
        self.tris.get(t.index as usize).is_some_and(|x| x.alive && x.stamp == t.stamp)
    }

    pub(crate) fn tref(&self, t: u32) -> TriangleRef {
        TriangleRef { index: t, stamp: self.tris[t as usize].stamp }
    }

    /// Triangle containing `q` (modulo the period on periodic domains). Ties
    /// on edges and vertices resolve to the incident triangle with the lowest
    /// index.
    pub fn locate(&mut self, q: Point2, hint: Option<TriangleRef>) -> Location {
        let q = if self.periodic { Point2::new(wrap_unit(q.x), wrap_unit(q.y)) } else { q };
        let start = self.hint_index(hint);
        let t = self.walk(q, start);
        if t == NONE {
            return Location::OutsideHull;
        }
        let tri = &self.tris[t as usize];
        let mut zero = Vec::new();
        for i in 0..3 {
            let a = self.verts[tri.v[(i + 1) % 3] as usize].pos;
            let b = self.verts[tri.v[(i + 2) % 3] as usize].pos;
            if orient2d(a, b, q) == Ordering::Equal {
                zero.push(i);
            }
        }
        let mut cands = vec![t];
        match zero.len() {
            1 => cands.push(tri.n[zero[0]]),
            2 => {
                let vi = 3 - zero[0] - zero[1];
                cands = self.star(tri.v[vi]);
            }
            _ => {}
        }
        let mut best: Option<TriangleRef> = None;
        for c in cands {
            if c == NONE {
                continue;
            }
            if self.has_frame_vertex(c) {
                continue;
            }
            let r = self.canonical(self.tref(c));
            if best.is_none_or(|b| r.index < b.index) {
                best = Some(r);
            }
        }
        match best {
            Some(r) => Location::Triangle(r),
            None => Location::OutsideHull,
        }
    }

    // ----- topology queries -----

    /// Triangles around vertex `v` in ccw order.
    pub(crate) fn star(&self, v: u32) -> Vec<u32> {
        let t0 = self.verts[v as usize].tri;
        let mut out = Vec::with_capacity(8);
        let mut t = t0;
        loop {
            out.push(t);
            let i = self.index_in(t, v);
            let nt = self.tris[t as usize].n[(i + 1) % 3];
            if nt == NONE || nt == t0 {
                break;
            }
            t = nt;
        }
        out
    }

    pub(crate) fn is_frame(&self, v: u32) -> bool {
        self.verts[v as usize].site == NONE
    }

    pub(crate) fn has_frame_vertex(&self, t: u32) -> bool {
        self.tris[t as usize].v.iter().any(|&v| self.is_frame(v))
    }

    fn canonical_rank(&self, t: u32) -> (u32, (i8, i8)) {
        let tri = &self.tris[t as usize];
        tri.v
            .iter()
            .map(|&v| {
                let x = &self.verts[v as usize];
                (x.site, x.offset)
            })
            .min()
            .unwrap()
    }

    /// Whether the triangle is the exposed representative.
    pub fn is_canonical(&self, t: TriangleRef) -> bool {
        let i = t.index;
        if self.has_frame_vertex(i) {
            return false;
        }
        !self.periodic || self.canonical_rank(i).1 == (0, 0)
    }

    /// The exposed representative of a periodic translate; identity otherwise.
    pub fn canonical(&self, t: TriangleRef) -> TriangleRef {
        if !self.periodic || self.has_frame_vertex(t.index) {
            return t;
        }
        let (site, off) = self.canonical_rank(t.index);
        if off == (0, 0) {
            return t;
        }
        let tri = &self.tris[t.index as usize];
        let want: Vec<(u32, (i8, i8))> = tri
            .v
            .iter()
            .map(|&v| {
                let x = &self.verts[v as usize];
                (x.site, (x.offset.0 - off.0, x.offset.1 - off.1))
            })
            .collect();
        let anchor = self.sites[site as usize].as_ref().unwrap().verts[0];
        for c in self.star(anchor) {
            let ct = &self.tris[c as usize];
            let ok = ct.v.iter().all(|&v| {
                let x = &self.verts[v as usize];
                want.contains(&(x.site, x.offset))
            });
            if ok {
                return self.tref(c);
            }
        }
        t
    }

    /// Exposed live triangles in ascending index order.
    pub fn triangles(&self) -> Vec<TriangleRef> {
        (0..self.tris.len() as u32)
            .filter(|&i| self.tris[i as usize].alive)
            .map(|i| self.tref(i))
            .filter(|&r| self.is_canonical(r))
            .collect()
    }

    /// On bounded domains: all live triangles, frame triangles included.
    /// On periodic domains: the exposed triangles.
    pub fn triangles_with_frame(&self) -> Vec<TriangleRef> {
        if self.periodic {
            return self.triangles();
        }
        (0..self.tris.len() as u32).filter(|&i| self.tris[i as usize].alive).map(|i| self.tref(i)).collect()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles().len()
    }

    pub fn tri_vertices(&self, t: TriangleRef) -> [VertexView; 3] {
        let tri = &self.tris[t.index as usize];
        tri.v.map(|v| self.vertex_view(v))
    }

    pub(crate) fn vertex_view(&self, v: u32) -> VertexView {
        let x = &self.verts[v as usize];
        VertexView {
            index: v,
            pos: x.pos,
            weight: x.weight,
            site: if x.site == NONE { None } else { Some(SiteId(x.site)) },
            offset: x.offset,
        }
    }

    pub fn tri_center(&self, t: TriangleRef) -> Point2 {
        self.tris[t.index as usize].center
    }

    pub fn tri_power(&self, t: TriangleRef) -> f64 {
        self.tris[t.index as usize].power
    }

    /// Raw neighbors (not mapped to exposed representatives).
    pub fn tri_neighbors(&self, t: TriangleRef) -> [Option<TriangleRef>; 3] {
        let tri = &self.tris[t.index as usize];
        tri.n.map(|n| if n == NONE { None } else { Some(self.tref(n)) })
    }

    /// Triangles sharing at least one vertex with `t` (excluding `t`), raw.
    pub fn one_ring(&self, t: TriangleRef) -> Vec<TriangleRef> {
        let mut out: Vec<u32> = Vec::with_capacity(16);
        for &v in &self.tris[t.index as usize].v {
            for s in self.star(v) {
                if s != t.index {
                    out.push(s);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out.into_iter().map(|i| self.tref(i)).collect()
    }

    /// Vertex of the fundamental copy of a site.
    pub(crate) fn site_vertex(&self, id: SiteId) -> Option<u32> {
        self.sites.get(id.0 as usize).and_then(|r| r.as_ref()).map(|r| r.verts[0])
    }

    /// Sites adjacent to `id` in the triangulation, ascending.
    pub fn site_neighbors(&self, id: SiteId) -> Result<Vec<SiteId>, TriangulationError> {
        let v = self.site_vertex(id).ok_or(TriangulationError::UnknownSite(id))?;
        let mut out = Vec::new();
        for t in self.star(v) {
            for &u in &self.tris[t as usize].v {
                let s = self.verts[u as usize].site;
                if s != NONE && s != id.0 {
                    out.push(SiteId(s));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Displacements to the neighbor vertices of the fundamental copy.
    pub fn site_neighbor_edges(&self, id: SiteId) -> Result<Vec<(SiteId, Point2)>, TriangulationError> {
        let v = self.site_vertex(id).ok_or(TriangulationError::UnknownSite(id))?;
        let p = self.verts[v as usize].pos;
        let mut out = Vec::new();
        for t in self.star(v) {
            let i = self.index_in(t, v);
            let u = self.tris[t as usize].v[(i + 1) % 3];
            let x = &self.verts[u as usize];
            if x.site != NONE {
                out.push((SiteId(x.site), x.pos - p));
            }
        }
        Ok(out)
    }

    /// Whether the site's vertex is incident to a frame triangle.
    pub fn is_hull_site(&self, id: SiteId) -> bool {
        match self.site_vertex(id) {
            Some(v) => self.star(v).iter().any(|&t| self.has_frame_vertex(t)),
            None => false,
        }
    }

    /// Power cell of a site as a ccw polygon; bounded domains clip to the
    /// domain box.
    pub fn power_cell(&self, id: SiteId) -> Result<Vec<Point2>, TriangulationError> {
        let v = self.site_vertex(id).ok_or(TriangulationError::UnknownSite(id))?;
        let cell: Vec<Point2> = self.star(v).iter().map(|&t| self.tris[t as usize].center).collect();
        if self.periodic {
            return Ok(cell);
        }
        let (lo, hi) = self.bbox;
        let clip = [lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
        Ok(clip_convex(&cell, &clip))
    }

    /// Unclipped power cell (frame vertices bound hull cells).
    pub fn raw_power_cell(&self, id: SiteId) -> Result<Vec<Point2>, TriangulationError> {
        let v = self.site_vertex(id).ok_or(TriangulationError::UnknownSite(id))?;
        Ok(self.star(v).iter().map(|&t| self.tris[t as usize].center).collect())
    }

    // ----- mutation API -----

    /// Inserts a new disk and returns its fresh id.
    pub fn insert(&mut self, center: Point2, radius: f64, hint: Option<TriangleRef>) -> Result<SiteId, TriangulationError> {
        let id = self.next_site_id();
        self.insert_with_id(WeightedSite::new(id, center, radius), hint)?;
        Ok(id)
    }

    pub(crate) fn insert_with_id(&mut self, site: WeightedSite, hint: Option<TriangleRef>) -> Result<(), TriangulationError> {
        let id = site.id;
        if site.radius() <= 0.0 || !site.radius().is_finite() {
            return Err(TriangulationError::InvalidRadius(id));
        }
        if self.site(id).is_some() {
            return Err(TriangulationError::DuplicateSiteId(id));
        }
        let mut site = site;
        if self.periodic {
            site.center = Point2::new(wrap_unit(site.center.x), wrap_unit(site.center.y));
        } else {
            let (lo, hi) = self.bbox;
            let c = site.center;
            if !(c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y) {
                return Err(TriangulationError::OutsideDomain(c));
            }
        }
        let w = site.weight();
        let start = self.hint_index(hint);
        let copies = if self.periodic { 9 } else { 1 };
        let mut verts = [NONE; 9];
        let mut anchor_tri = start;
        for k in 0..copies {
            let p = translate(site.center, OFFSETS[k]);
            let hint_k = if k == 0 { start } else { self.translated_hint(anchor_tri, OFFSETS[k]) };
            match self.insert_vertex(p, w, id.0, OFFSETS[k], hint_k) {
                Ok(v) => {
                    verts[k] = v;
                    if k == 0 {
                        anchor_tri = self.verts[v as usize].tri;
                    }
                }
                Err(e) => {
                    // Roll back copies already inserted.
                    for &v in verts.iter().take(k) {
                        self.remove_vertex(v);
                    }
                    return Err(match e {
                        TriangulationError::RedundantSite(_) => TriangulationError::RedundantSite(id),
                        other => other,
                    });
                }
            }
        }
        let idx = id.0 as usize;
        if self.sites.len() <= idx {
            self.sites.resize(idx + 1, None);
        }
        self.sites[idx] = Some(SiteRecord { site, verts });
        self.live_sites += 1;
        self.version += 1;
        Ok(())
    }

    /// Start triangle for inserting the copy at `off`: the corresponding
    /// translate of a vertex of `t`, if present.
    fn translated_hint(&self, t: u32, off: (i8, i8)) -> u32 {
        if t == NONE || !self.tris[t as usize].alive {
            return self.last;
        }
        for &v in &self.tris[t as usize].v {
            let x = &self.verts[v as usize];
            if x.site == NONE {
                continue;
            }
            let o = (x.offset.0 + off.0, x.offset.1 + off.1);
            if let Some(k) = OFFSETS.iter().position(|&q| q == o) {
                if let Some(Some(rec)) = self.sites.get(x.site as usize) {
                    let u = rec.verts[k];
                    if u != NONE {
                        return self.verts[u as usize].tri;
                    }
                }
            }
        }
        self.last
    }

    pub fn remove(&mut self, id: SiteId) -> Result<(), TriangulationError> {
        let rec = self
            .sites
            .get(id.0 as usize)
            .and_then(|r| r.clone())
            .ok_or(TriangulationError::UnknownSite(id))?;
        if self.live_sites <= 1 {
            return Err(TriangulationError::TooFewSites);
        }
        for &v in rec.verts.iter().filter(|&&v| v != NONE) {
            self.remove_vertex(v);
        }
        self.sites[id.0 as usize] = None;
        self.live_sites -= 1;
        self.version += 1;
        Ok(())
    }

    /// Moves a site keeping its radius and id. On failure the site is
    /// restored at its old position.
    pub fn move_site(&mut self, id: SiteId, new_center: Point2) -> Result<SiteId, TriangulationError> {
        let old = *self.site(id).ok_or(TriangulationError::UnknownSite(id))?;
        self.remove(id)?;
        match self.insert_with_id(WeightedSite::new(id, new_center, old.radius()), None) {
            Ok(()) => Ok(id),
            Err(e) => {
                self.insert_with_id(old, None).expect("restoring a removed site");
                Err(e)
            }
        }
    }

    /// Changes one radius. Fails with `ConflictError` when the new disk would
    /// cover a neighbor center.
    pub fn set_radius(&mut self, id: SiteId, new_r: f64) -> Result<(), TriangulationError> {
        let old = *self.site(id).ok_or(TriangulationError::UnknownSite(id))?;
        if new_r <= 0.0 || !new_r.is_finite() {
            return Err(TriangulationError::InvalidRadius(id));
        }
        for s in self.sites() {
            if s.id == id {
                continue;
            }
            let d2 = self.distance2(s.center, old.center);
            if d2 < new_r * new_r || d2 < s.weight() {
                return Err(TriangulationError::ConflictError(id, s.id));
            }
        }
        self.remove(id)?;
        match self.insert_with_id(WeightedSite::new(id, old.center, new_r), None) {
            Ok(()) => Ok(()),
            Err(e) => {
                self.insert_with_id(old, None).expect("restoring a removed site");
                Err(e)
            }
        }
    }

    /// Replaces all sites and rebuilds from scratch.
    pub fn rebuild_all(&mut self, sites: &[WeightedSite]) -> Result<(), TriangulationError> {
        let domain = if self.periodic {
            SamplingDomain::PeriodicUnitSquare
        } else {
            SamplingDomain::Box { min: self.bbox.0, max: self.bbox.1 }
        };
        let version = self.version;
        *self = Self::build(sites, &domain)?;
        self.version = version + 1;
        Ok(())
    }

    /// Sets every radius to `r`. When all radii were already equal the
    /// triangulation is Delaunay before and after, so only the weights and
    /// cached powers change; otherwise the structure is rebuilt.
    pub fn set_all_radii(&mut self, r: f64) -> Result<(), TriangulationError> {
        let radii: Vec<f64> = self.sites().map(|s| s.radius()).collect();
        let uniform = radii.windows(2).all(|w| w[0] == w[1]);
        if !uniform {
            let sites: Vec<WeightedSite> = self.sites().map(|s| WeightedSite::new(s.id, s.center, r)).collect();
            return self.rebuild_all(&sites);
        }
        let w = r * r;
        for rec in self.sites.iter_mut().flatten() {
            rec.site = WeightedSite::new(rec.site.id, rec.site.center, r);
        }
        for v in self.verts.iter_mut().filter(|v| v.alive && v.site != NONE) {
            v.weight = w;
        }
        for i in 0..self.tris.len() {
            if !self.tris[i].alive {
                continue;
            }
            let v = self.tris[i].v;
            let wp = |k: usize| {
                let x = &self.verts[v[k] as usize];
                WeightedPoint::new(x.pos, x.weight)
            };
            let (a, b, c) = (wp(0), wp(1), wp(2));
            let center = crate::geom::power_center_unchecked(a, b, c);
            self.tris[i].center = center;
            self.tris[i].power = power_at(center, a);
        }
        self.version += 1;
        debug_assert!(self.audit().is_ok());
        Ok(())
    }

    /// Squared distance respecting periodicity.
    pub fn distance2(&self, a: Point2, b: Point2) -> f64 {
        let mut d = a - b;
        if self.periodic {
            d = Point2::new(d.x - d.x.round(), d.y - d.y.round());
        }
        d.norm2()
    }

    // ----- audits and dumps -----

    /// Structural checks and exact local regularity of every edge.
    pub fn audit(&self) -> Result<(), String> {
        for (i, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            let [a, b, c] = t.v.map(|v| self.verts[v as usize].pos);
            if orient2d(a, b, c) != Ordering::Greater {
                return Err(format!("triangle {i} is not ccw"));
            }
            for k in 0..3 {
                if !self.verts[t.v[k] as usize].alive {
                    return Err(format!("triangle {i} uses dead vertex"));
                }
                let u = t.n[k];
                if u == NONE {
                    continue;
                }
                let ut = &self.tris[u as usize];
                if !ut.alive {
                    return Err(format!("triangle {i} points at dead neighbor {u}"));
                }
                let (from, to) = (t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
                let back = (0..3).find(|&s| ut.v[(s + 1) % 3] == to && ut.v[(s + 2) % 3] == from);
                match back {
                    Some(s) if ut.n[s] == i as u32 => {
                        let q = ut.v[s];
                        let r = power_test(self.wp(t.v[0]), self.wp(t.v[1]), self.wp(t.v[2]), self.wp(q));
                        if r == Ordering::Greater {
                            return Err(format!("edge between {i} and {u} is not regular"));
                        }
                    }
                    _ => return Err(format!("neighbor relation {i} -> {u} is not symmetric")),
                }
            }
        }
        for (i, v) in self.verts.iter().enumerate() {
            if !v.alive {
                continue;
            }
            let t = &self.tris[v.tri as usize];
            if !t.alive || !t.v.contains(&(i as u32)) {
                return Err(format!("vertex {i} has a stale triangle pointer"));
            }
        }
        Ok(())
    }

    /// Brute force empty-power-circle check of every exposed triangle
    /// against every site within the tolerance `1e-10·diam²`.
    pub fn audit_global(&self, max_triangles: usize) -> Result<(), String> {
        let (lo, hi) = self.bbox;
        let diam2 = lo.dist2(hi);
        let eps = 1e-10 * diam2;
        let live: Vec<&Vertex> = self.verts.iter().filter(|v| v.alive && v.site != NONE).collect();
        let tris = self.triangles();
        let step = (tris.len() / max_triangles.max(1)).max(1);
        for t in tris.iter().step_by(step) {
            let tri = &self.tris[t.index as usize];
            for v in &live {
                if tri.v.iter().any(|&u| std::ptr::eq(&self.verts[u as usize], *v)) {
                    continue;
                }
                let p = power_at(tri.center, WeightedPoint::new(v.pos, v.weight));
                if p < tri.power - eps {
                    return Err(format!("triangle {} violates the empty power circle", t.index));
                }
            }
        }
        Ok(())
    }

    /// Canonical keys of the exposed triangles, sorted. Each key lists
    /// `(site id, offset relative to the first vertex)` starting at the
    /// smallest site, preserving orientation.
    pub fn triangle_keys(&self) -> Vec<[(u32, i8, i8); 3]> {
        let mut keys: Vec<[(u32, i8, i8); 3]> = self
            .triangles()
            .into_iter()
            .map(|t| {
                let v = self.tris[t.index as usize].v.map(|u| {
                    let x = &self.verts[u as usize];
                    (x.site, x.offset)
                });
                let k = (0..3).min_by_key(|&k| (v[k].0, v[k].1)).unwrap();
                let base = v[k].1;
                [0, 1, 2].map(|j| {
                    let (s, o) = v[(k + j) % 3];
                    (s, o.0 - base.0, o.1 - base.1)
                })
            })
            .collect();
        keys.sort_unstable();
        keys
    }

    /// OFF text: sites in ascending id order, then exposed triangles.
    pub fn to_off(&self) -> String {
        let mut index = vec![u32::MAX; self.sites.len()];
        let mut out = String::new();
        let sites: Vec<&WeightedSite> = self.sites().collect();
        for (k, s) in sites.iter().enumerate() {
            index[s.id.0 as usize] = k as u32;
        }
        let tris = self.triangles();
        let _ = writeln!(out, "OFF\n{} {} 0", sites.len(), tris.len());
        for s in &sites {
            let _ = writeln!(out, "{} {} 0", s.center.x, s.center.y);
        }
        for t in tris {
            let v = self.tris[t.index as usize].v.map(|u| index[self.verts[u as usize].site as usize]);
            let _ = writeln!(out, "3 {} {} {}", v[0], v[1], v[2]);
        }
        out
    }
}

pub(crate) fn translate(p: Point2, off: (i8, i8)) -> Point2 {
    Point2::new(p.x + off.0 as f64, p.y + off.1 as f64)
}

fn hilbert_key(p: Point2, lo: Point2, hi: Point2) -> u64 {
    const N: u64 = 1 << 16;
    let sx = ((p.x - lo.x) / (hi.x - lo.x)).clamp(0.0, 1.0);
    let sy = ((p.y - lo.y) / (hi.y - lo.y)).clamp(0.0, 1.0);
    let mut x = ((sx * (N - 1) as f64) as u64).min(N - 1);
    let mut y = ((sy * (N - 1) as f64) as u64).min(N - 1);
    let mut d = 0u64;
    let mut s = N / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = N - 1 - x;
                y = N - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}
