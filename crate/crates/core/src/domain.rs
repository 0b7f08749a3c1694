//! Sampling domains: the periodic unit square, axis-aligned boxes and
//! polygons with holes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;
use crate::polygon::{
    convex_contains, ring_contains, ring_is_simple, rings_intersect, segment_intersection, signed_area,
    triangulate_with_holes,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("InvalidPolygon: {0}")]
    InvalidPolygon(String),
    #[error("domain has no area")]
    EmptyDomain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SamplingDomain {
    PeriodicUnitSquare,
    Box { min: Point2, max: Point2 },
    PolygonWithHoles { outer: Vec<Point2>, holes: Vec<Vec<Point2>> },
}

impl SamplingDomain {
    pub fn unit_box() -> Self {
        SamplingDomain::Box { min: Point2::new(0.0, 0.0), max: Point2::new(1.0, 1.0) }
    }

    pub fn new_box(min: Point2, max: Point2) -> Result<Self, DomainError> {
        if !(max.x > min.x && max.y > min.y) {
            return Err(DomainError::EmptyDomain);
        }
        Ok(SamplingDomain::Box { min, max })
    }

    /// Validates the rings and normalizes orientation (outer ccw, holes cw).
    pub fn polygon(outer: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self, DomainError> {
        let mut outer = outer;
        if outer.len() < 3 {
            return Err(DomainError::InvalidPolygon("outer ring needs at least 3 vertices".into()));
        }
        if !ring_is_simple(&outer) {
            return Err(DomainError::InvalidPolygon("outer ring self-intersects".into()));
        }
        if signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        let mut norm_holes = Vec::with_capacity(holes.len());
        for (k, mut h) in holes.into_iter().enumerate() {
            if h.len() < 3 || !ring_is_simple(&h) {
                return Err(DomainError::InvalidPolygon(format!("hole {k} is not a simple ring")));
            }
            if rings_intersect(&outer, &h) || !ring_contains(&outer, h[0]) {
                return Err(DomainError::InvalidPolygon(format!("hole {k} is not strictly inside the outer ring")));
            }
            if signed_area(&h) > 0.0 {
                h.reverse();
            }
            norm_holes.push(h);
        }
        for i in 0..norm_holes.len() {
            for j in (i + 1)..norm_holes.len() {
                if rings_intersect(&norm_holes[i], &norm_holes[j])
                    || ring_contains(&norm_holes[i], norm_holes[j][0])
                    || ring_contains(&norm_holes[j], norm_holes[i][0])
                {
                    return Err(DomainError::InvalidPolygon(format!("holes {i} and {j} overlap")));
                }
            }
        }
        let d = SamplingDomain::PolygonWithHoles { outer, holes: norm_holes };
        if d.area() <= 0.0 {
            return Err(DomainError::EmptyDomain);
        }
        Ok(d)
    }

    /// Annulus between two concentric circles approximated by regular polygons.
    pub fn annulus(center: Point2, r_outer: f64, r_inner: f64, segments: usize) -> Result<Self, DomainError> {
        let outer = crate::polygon::inscribed_ngon(center, r_outer, segments);
        let mut inner = crate::polygon::inscribed_ngon(center, r_inner, segments);
        inner.reverse();
        Self::polygon(outer, vec![inner])
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, SamplingDomain::PeriodicUnitSquare)
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        match self {
            SamplingDomain::PeriodicUnitSquare => (Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)),
            SamplingDomain::Box { min, max } => (*min, *max),
            SamplingDomain::PolygonWithHoles { outer, .. } => {
                let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in outer {
                    lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                (lo, hi)
            }
        }
    }

    /// Boundary rings; empty for the periodic square.
    pub fn rings(&self) -> Vec<Vec<Point2>> {
        match self {
            SamplingDomain::PeriodicUnitSquare => Vec::new(),
            SamplingDomain::Box { min, max } => {
                vec![vec![*min, Point2::new(max.x, min.y), *max, Point2::new(min.x, max.y)]]
            }
            SamplingDomain::PolygonWithHoles { outer, holes } => {
                let mut v = vec![outer.clone()];
                v.extend(holes.iter().cloned());
                v
            }
        }
    }

    pub fn contains(&self, q: Point2) -> bool {
        match self {
            SamplingDomain::PeriodicUnitSquare => true,
            SamplingDomain::Box { min, max } => q.x >= min.x && q.x <= max.x && q.y >= min.y && q.y <= max.y,
            SamplingDomain::PolygonWithHoles { outer, holes } => {
                ring_contains(outer, q) && !holes.iter().any(|h| ring_contains(h, q))
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            SamplingDomain::PeriodicUnitSquare => 1.0,
            SamplingDomain::Box { min, max } => (max.x - min.x) * (max.y - min.y),
            SamplingDomain::PolygonWithHoles { outer, holes } => {
                signed_area(outer) - holes.iter().map(|h| signed_area(h).abs()).sum::<f64>()
            }
        }
    }

    /// Triangles exactly tiling the domain (the periodic square uses its
    /// fundamental cell).
    pub fn triangles(&self) -> Vec<[Point2; 3]> {
        match self {
            SamplingDomain::PeriodicUnitSquare | SamplingDomain::Box { .. } => {
                let (lo, hi) = self.bbox();
                let b = Point2::new(hi.x, lo.y);
                let d = Point2::new(lo.x, hi.y);
                vec![[lo, b, hi], [lo, hi, d]]
            }
            SamplingDomain::PolygonWithHoles { outer, holes } => triangulate_with_holes(outer, holes),
        }
    }

    /// Wraps a point into the fundamental cell; identity on bounded domains.
    pub fn wrap(&self, p: Point2) -> Point2 {
        if self.is_periodic() {
            Point2::new(wrap_unit(p.x), wrap_unit(p.y))
        } else {
            p
        }
    }

    /// Shortest representative of a displacement under periodicity.
    pub fn min_image(&self, d: Point2) -> Point2 {
        if self.is_periodic() {
            Point2::new(d.x - d.x.round(), d.y - d.y.round())
        } else {
            d
        }
    }

    pub fn distance2(&self, a: Point2, b: Point2) -> f64 {
        self.min_image(a - b).norm2()
    }
}

/// Wraps into [0, 1) and snaps to a 2⁻⁵² lattice so that translating by ±1 is
/// exact in floating point.
pub fn wrap_unit(x: f64) -> f64 {
    const Q: f64 = 4_503_599_627_370_496.0; // 2^52
    let mut w = x.rem_euclid(1.0);
    w = (w * Q).round() / Q;
    if w >= 1.0 {
        w -= 1.0;
    }
    w
}

/// Uniform bucket index of the boundary segments of a bounded domain.
#[derive(Clone, Debug)]
pub struct SegmentIndex {
    segs: Vec<(Point2, Point2)>,
    lo: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SegmentIndex {
    pub fn new(domain: &SamplingDomain) -> Self {
        let mut segs = Vec::new();
        for ring in domain.rings() {
            let n = ring.len();
            for i in 0..n {
                segs.push((ring[i], ring[(i + 1) % n]));
            }
        }
        let (lo, hi) = domain.bbox();
        let ext = (hi.x - lo.x).max(hi.y - lo.y).max(1e-300);
        let side = ((segs.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
        let cell = ext / side as f64 * 1.000001;
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, &(a, b)) in segs.iter().enumerate() {
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, Point2::new(a.x.min(b.x), a.y.min(b.y)));
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, Point2::new(a.x.max(b.x), a.y.max(b.y)));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(k as u32);
                }
            }
        }
        SegmentIndex { segs, lo, cell, nx, ny, buckets }
    }

    fn cell_of(lo: Point2, cell: f64, nx: usize, ny: usize, p: Point2) -> (usize, usize) {
        let i = ((p.x - lo.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let j = ((p.y - lo.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    pub fn segments(&self) -> &[(Point2, Point2)] {
        &self.segs
    }

    /// Segments whose bounding box may overlap the query box (deduplicated).
    pub fn query(&self, qlo: Point2, qhi: Point2) -> Vec<u32> {
        let (i0, j0) = Self::cell_of(self.lo, self.cell, self.nx, self.ny, qlo);
        let (i1, j1) = Self::cell_of(self.lo, self.cell, self.nx, self.ny, qhi);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.nx + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&k| {
            let (a, b) = self.segs[k as usize];
            a.x.max(b.x) >= qlo.x && a.x.min(b.x) <= qhi.x && a.y.max(b.y) >= qlo.y && a.y.min(b.y) <= qhi.y
        });
        out
    }

    /// Corner points of `poly ∩ domain` for a ccw convex polygon: polygon
    /// vertices inside the domain, domain vertices inside the polygon and
    /// boundary crossings. Their convex hull contains the intersection.
    pub fn convex_cut_points(&self, domain: &SamplingDomain, poly: &[Point2]) -> Vec<Point2> {
        let mut out: Vec<Point2> = poly.iter().copied().filter(|&p| domain.contains(p)).collect();
        let (mut lo, mut hi) = (poly[0], poly[0]);
        for p in poly {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let n = poly.len();
        for k in self.query(lo, hi) {
            let (a, b) = self.segs[k as usize];
            if convex_contains(poly, a, 0.0) {
                out.push(a);
            }
            for i in 0..n {
                if let Some(x) = segment_intersection(a, b, poly[i], poly[(i + 1) % n]) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// True when some boundary segment touches the convex polygon.
    pub fn touches_convex(&self, poly: &[Point2]) -> bool {
        let (mut lo, mut hi) = (poly[0], poly[0]);
        for p in poly {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let n = poly.len();
        self.query(lo, hi).into_iter().any(|k| {
            let (a, b) = self.segs[k as usize];
            convex_contains(poly, a, 0.0)
                || (0..n).any(|i| crate::polygon::segments_cross(a, b, poly[i], poly[(i + 1) % n]))
        })
    }
}

/// Places fixed 1D samples along every boundary ring. Sharp corners are kept,
/// the stretches between them are split evenly with spacing in `[r, √3 r]`
/// where possible; samples violating the pairwise separation are dropped.
pub fn sample_boundary(domain: &SamplingDomain, radius: impl Fn(Point2) -> f64) -> Vec<(Point2, f64)> {
    const CORNER_TURN: f64 = 0.35; // radians, about 20 degrees
    let mut out: Vec<(Point2, f64)> = Vec::new();
    for ring in domain.rings() {
        let n = ring.len();
        let turn = |i: usize| {
            let a = ring[(i + n - 1) % n];
            let b = ring[i];
            let c = ring[(i + 1) % n];
            let u = b - a;
            let v = c - b;
            u.cross(v).atan2(u.dot(v)).abs()
        };
        let mut corners: Vec<usize> = (0..n).filter(|&i| turn(i) > CORNER_TURN).collect();
        if corners.is_empty() {
            corners.push(0);
        }
        let m = corners.len();
        for c in 0..m {
            let start = corners[c];
            let end = corners[(c + 1) % m];
            // Polyline from start to end (wrapping).
            let mut pl = vec![ring[start]];
            let mut k = start;
            loop {
                k = (k + 1) % n;
                pl.push(ring[k]);
                if k == end {
                    break;
                }
            }
            let len: f64 = pl.windows(2).map(|w| w[0].dist(w[1])).sum();
            let r = radius(ring[start]).min(radius(ring[end]));
            let mid_r = radius(point_at(&pl, len * 0.5));
            let r = r.min(mid_r);
            let pieces = ((len / (3f64.sqrt() * r)).ceil() as usize).max(1);
            for s in 0..pieces {
                let p = point_at(&pl, len * s as f64 / pieces as f64);
                out.push((p, radius(p)));
            }
        }
    }
    // Drop violators of the separation invariant, keeping earlier samples.
    let mut kept: Vec<(Point2, f64)> = Vec::with_capacity(out.len());
    for (p, r) in out {
        if kept.iter().all(|&(q, rq)| p.dist2(q) >= r.max(rq).powi(2)) {
            kept.push((p, r));
        }
    }
    kept
}

fn point_at(pl: &[Point2], s: f64) -> Point2 {
    let mut acc = 0.0;
    for w in pl.windows(2) {
        let l = w[0].dist(w[1]);
        if acc + l >= s && l > 0.0 {
            return w[0].lerp(w[1], (s - acc) / l);
        }
        acc += l;
    }
    *pl.last().unwrap()
}
