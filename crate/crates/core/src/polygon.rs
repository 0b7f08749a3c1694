//! Polygon helpers: convex clipping, hulls, rings and ear clipping.

use std::cmp::Ordering;

use crate::geom::{cross3, Point2};
use crate::predicates::orient2d;

pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * s
}

pub fn area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

pub fn centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let a = signed_area(poly);
    if a.abs() < 1e-300 {
        let s = poly.iter().fold(Point2::default(), |acc, &p| acc + p);
        return s * (1.0 / n.max(1) as f64);
    }
    let mut c = Point2::default();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let w = p.cross(q);
        c = c + (p + q) * w;
    }
    c * (1.0 / (6.0 * a))
}

/// Counter-clockwise hull without collinear points (Andrew's monotone chain).
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2
                && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], p) != Ordering::Greater
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Half-plane `{x : normal·x <= offset}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    /// Points left of (or on) the directed line `a → b`.
    pub fn left_of(a: Point2, b: Point2) -> Self {
        let normal = (b - a).perp() * -1.0;
        HalfPlane { normal, offset: normal.dot(a) }
    }

    pub fn eval(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Clips a convex (or any simple) polygon against a half-plane.
pub fn clip_halfplane(poly: &[Point2], h: &HalfPlane) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = h.eval(p);
        let fq = h.eval(q);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p.lerp(q, t));
        }
    }
    out
}

/// Sutherland–Hodgman clipping by a convex ccw polygon. For a non-convex
/// subject the result can contain zero-width bridges; its area is still exact.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        out = clip_halfplane(&out, &HalfPlane::left_of(clip[i], clip[(i + 1) % n]));
    }
    out
}

/// Closed containment in a ccw convex polygon with an absolute slack.
pub fn convex_contains(poly: &[Point2], q: Point2, slack: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        e.cross(q - a) >= -slack * e.norm()
    })
}

/// Even-odd point in ring test.
pub fn ring_contains(ring: &[Point2], q: Point2) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > q.y) != (b.y > q.y) {
            let x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if q.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient2d(a, b, c);
    let o2 = orient2d(a, b, d);
    let o3 = orient2d(c, d, a);
    let o4 = orient2d(c, d, b);
    if o1 != o2 && o3 != o4 && o1 != Ordering::Equal && o2 != Ordering::Equal {
        return o3 != Ordering::Equal && o4 != Ordering::Equal;
    }
    let on = |p: Point2, q: Point2, r: Point2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == Ordering::Equal && on(a, b, c))
        || (o2 == Ordering::Equal && on(a, b, d))
        || (o3 == Ordering::Equal && on(c, d, a))
        || (o4 == Ordering::Equal && on(c, d, b))
        || (o1 != o2 && o3 != o4)
}

/// Intersection point of segments `ab` and `cd` if they cross.
pub fn segment_intersection(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<Point2> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den == 0.0 {
        return None;
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(a + r * t)
    } else {
        None
    }
}

/// True when no two non-adjacent edges of the closed ring touch.
pub fn ring_is_simple(ring: &[Point2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

pub fn rings_intersect(r1: &[Point2], r2: &[Point2]) -> bool {
    let (n, m) = (r1.len(), r2.len());
    for i in 0..n {
        for j in 0..m {
            if segments_cross(r1[i], r1[(i + 1) % n], r2[j], r2[(j + 1) % m]) {
                return true;
            }
        }
    }
    false
}

/// Regular n-gon inscribed in a circle, ccw.
pub fn inscribed_ngon(center: Point2, r: f64, n: usize) -> Vec<Point2> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            center + Point2::new(a.cos(), a.sin()) * r
        })
        .collect()
}

/// Uniform point in a triangle from two unit variates (square-root trick).
pub fn sample_triangle(a: Point2, b: Point2, c: Point2, u: f64, v: f64) -> Point2 {
    let su = u.sqrt();
    a * (1.0 - su) + b * (su * (1.0 - v)) + c * (su * v)
}

/// Triangulates a ccw outer ring with cw holes by ear clipping after
/// bridging every hole into the outer boundary.
pub fn triangulate_with_holes(outer: &[Point2], holes: &[Vec<Point2>]) -> Vec<[Point2; 3]> {
    let mut poly: Vec<Point2> = outer.to_vec();
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    let mut hs: Vec<Vec<Point2>> = holes
        .iter()
        .map(|h| {
            let mut h = h.clone();
            if signed_area(&h) > 0.0 {
                h.reverse();
            }
            h
        })
        .collect();
    hs.sort_by(|a, b| {
        let ma = a.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        let mb = b.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        mb.total_cmp(&ma)
    });
    for h in &hs {
        poly = bridge_hole(&poly, h);
    }
    ear_clip(poly)
}

fn bridge_hole(poly: &[Point2], hole: &[Point2]) -> Vec<Point2> {
    let (hi, m) = hole
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.x.total_cmp(&b.1.x))
        .expect("non-empty hole");
    // Nearest edge crossing the ray from m towards +x.
    let n = poly.len();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > m.y) == (b.y > m.y) && a.y != m.y && b.y != m.y {
            continue;
        }
        if a.y == b.y {
            continue;
        }
        let t = (m.y - a.y) / (b.y - a.y);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let x = a.x + t * (b.x - a.x);
        if x >= m.x && best.is_none_or(|(bx, _)| x < bx) {
            best = Some((x, i));
        }
    }
    let (ix, ei) = best.expect("hole must lie inside the outer ring");
    let hit = Point2::new(ix, m.y);
    let (a, b) = (poly[ei], poly[(ei + 1) % n]);
    let mut pi = if a.x > b.x { ei } else { (ei + 1) % n };
    let p = poly[pi];
    // Reflex vertices inside (m, hit, p) block the bridge; choose the one with
    // the smallest angle to the ray.
    let mut best_ang = f64::INFINITY;
    for (k, &q) in poly.iter().enumerate() {
        if q == p {
            continue;
        }
        let prev = poly[(k + n - 1) % n];
        let next = poly[(k + 1) % n];
        let reflex = cross3(prev, q, next) <= 0.0;
        if !reflex {
            continue;
        }
        let tri = if cross3(m, hit, p) > 0.0 { [m, hit, p] } else { [m, p, hit] };
        if crate::polygon::convex_contains(&tri, q, 0.0) {
            let d = q - m;
            let ang = d.y.abs().atan2(d.x);
            if ang < best_ang {
                best_ang = ang;
                pi = k;
            }
        }
    }
    let mut out = Vec::with_capacity(poly.len() + hole.len() + 2);
    out.extend_from_slice(&poly[..=pi]);
    for k in 0..=hole.len() {
        out.push(hole[(hi + k) % hole.len()]);
    }
    out.push(poly[pi]);
    out.extend_from_slice(&poly[pi + 1..]);
    out
}

fn ear_clip(mut poly: Vec<Point2>) -> Vec<[Point2; 3]> {
    let mut tris = Vec::with_capacity(poly.len());
    let mut guard = 0usize;
    while poly.len() > 3 {
        let n = poly.len();
        let mut found = None;
        for i in 0..n {
            let (a, b, c) = (poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]);
            if orient2d(a, b, c) != Ordering::Greater {
                continue;
            }
            let tri = [a, b, c];
            let blocked = poly.iter().any(|&q| q != a && q != b && q != c && convex_contains(&tri, q, 0.0));
            if !blocked {
                found = Some(i);
                break;
            }
        }
        let i = match found {
            Some(i) => i,
            None => {
                // Numerically stuck: drop the flattest vertex.
                guard += 1;
                (0..n)
                    .max_by(|&i, &j| {
                        let f = |k: usize| cross3(poly[(k + n - 1) % n], poly[k], poly[(k + 1) % n]);
                        f(i).total_cmp(&f(j))
                    })
                    .unwrap()
            }
        };
        let (a, b, c) = (poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]);
        if cross3(a, b, c) > 0.0 {
            tris.push([a, b, c]);
        }
        poly.remove(i);
        if guard > n {
            break;
        }
    }
    if poly.len() == 3 && cross3(poly[0], poly[1], poly[2]) > 0.0 {
        tris.push([poly[0], poly[1], poly[2]]);
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn hull_and_area() {
        let pts = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.5, 0.5), p(0.5, 0.0)];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((signed_area(&h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn halfplane_clip_square() {
        let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let h = HalfPlane::left_of(p(0.0, 1.0), p(1.0, 0.0));
        let out = clip_halfplane(&sq, &h);
        assert!((area(&out) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_subject_area_is_exact() {
        // U-shape clipped by a band that cuts both prongs.
        let u = [p(0.0, 0.0), p(3.0, 0.0), p(3.0, 3.0), p(2.0, 3.0), p(2.0, 1.0), p(1.0, 1.0), p(1.0, 3.0), p(0.0, 3.0)];
        let band = [p(-1.0, 2.0), p(4.0, 2.0), p(4.0, 2.5), p(-1.0, 2.5)];
        let out = clip_convex(&u, &band);
        assert!((area(&out) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ring_simplicity() {
        assert!(ring_is_simple(&[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]));
        assert!(!ring_is_simple(&[p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)]));
    }

    #[test]
    fn ear_clipping_with_hole_preserves_area() {
        let outer = vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 4.0), p(0.0, 4.0)];
        let hole = vec![p(1.0, 1.0), p(1.0, 3.0), p(3.0, 3.0), p(3.0, 1.0)];
        let tris = triangulate_with_holes(&outer, &[hole]);
        let total: f64 = tris.iter().map(|t| cross3(t[0], t[1], t[2]) * 0.5).sum();
        assert!((total - 12.0).abs() < 1e-9, "{total}");
        assert!(tris.iter().all(|t| cross3(t[0], t[1], t[2]) > 0.0));
    }

    #[test]
    fn l_shape_triangulation() {
        let l = vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(1.0, 1.0), p(1.0, 2.0), p(0.0, 2.0)];
        let tris = triangulate_with_holes(&l, &[]);
        assert_eq!(tris.len(), 4);
        let total: f64 = tris.iter().map(|t| cross3(t[0], t[1], t[2]) * 0.5).sum();
        assert!((total - 3.0).abs() < 1e-12);
    }
}
