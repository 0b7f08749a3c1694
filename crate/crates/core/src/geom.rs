//! Weighted-point arithmetic and the low level constructions used by every
//! other module.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predicates::orient2d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("collinear sites have no power center")]
    CollinearSites,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("disk centers coincide")]
    CoincidentCenters,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist2(self, o: Point2) -> f64 {
        (self - o).norm2()
    }

    pub fn dist(self, o: Point2) -> f64 {
        self.dist2(o).sqrt()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteId(pub u32);

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A sampling disk. The weight is always derived from the radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSite {
    pub id: SiteId,
    pub center: Point2,
    radius: f64,
}

impl WeightedSite {
    pub fn new(id: SiteId, center: Point2, radius: f64) -> Self {
        debug_assert!(radius >= 0.0 && center.is_finite());
        WeightedSite { id, center, radius }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn weight(&self) -> f64 {
        self.radius * self.radius
    }

    pub fn as_weighted(&self) -> WeightedPoint {
        WeightedPoint::new(self.center, self.weight())
    }

    /// True when `q` lies strictly inside the disk.
    pub fn covers(&self, q: Point2) -> bool {
        self.center.dist2(q) < self.weight()
    }
}

/// Position and weight without identity; also used for pseudo-sites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedPoint {
    pub pos: Point2,
    pub weight: f64,
}

impl WeightedPoint {
    pub fn new(pos: Point2, weight: f64) -> Self {
        WeightedPoint { pos, weight }
    }

    pub fn disk(pos: Point2, radius: f64) -> Self {
        WeightedPoint { pos, weight: radius * radius }
    }

    pub fn radius(&self) -> f64 {
        self.weight.max(0.0).sqrt()
    }
}

impl From<WeightedSite> for WeightedPoint {
    fn from(s: WeightedSite) -> Self {
        s.as_weighted()
    }
}

impl From<&WeightedSite> for WeightedPoint {
    fn from(s: &WeightedSite) -> Self {
        s.as_weighted()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    OnLine,
}

pub fn power(a: impl Into<WeightedPoint>, b: impl Into<WeightedPoint>) -> f64 {
    let (a, b) = (a.into(), b.into());
    a.pos.dist2(b.pos) - (a.weight + b.weight)
}

/// Power of a plain point `x` with respect to a weighted point.
pub fn power_at(x: Point2, s: impl Into<WeightedPoint>) -> f64 {
    let s = s.into();
    x.dist2(s.pos) - s.weight
}

pub fn power_center(
    a: impl Into<WeightedPoint>,
    b: impl Into<WeightedPoint>,
    c: impl Into<WeightedPoint>,
) -> Result<Point2, GeomError> {
    let (a, b, c) = (a.into(), b.into(), c.into());
    if orient2d(a.pos, b.pos, c.pos) == Ordering::Equal {
        return Err(GeomError::CollinearSites);
    }
    Ok(power_center_unchecked(a, b, c))
}

/// Intersection of the two radical axes relative to `a`; callers guarantee
/// non-collinear input.
pub(crate) fn power_center_unchecked(a: WeightedPoint, b: WeightedPoint, c: WeightedPoint) -> Point2 {
    let u = b.pos - a.pos;
    let v = c.pos - a.pos;
    let ru = u.norm2() - b.weight + a.weight;
    let rv = v.norm2() - c.weight + a.weight;
    let d = 2.0 * u.cross(v);
    a.pos + Point2::new((ru * v.y - rv * u.y) / d, (u.x * rv - v.x * ru) / d)
}

pub fn triangle_power(
    a: impl Into<WeightedPoint>,
    b: impl Into<WeightedPoint>,
    c: impl Into<WeightedPoint>,
) -> Result<f64, GeomError> {
    let a = a.into();
    let center = power_center(a, b, c)?;
    Ok(power_at(center, a))
}

pub fn side_of(seg: (Point2, Point2), q: Point2) -> Result<Side, GeomError> {
    if seg.0 == seg.1 {
        return Err(GeomError::DegenerateSegment);
    }
    Ok(match orient2d(seg.0, seg.1, q) {
        Ordering::Greater => Side::Left,
        Ordering::Less => Side::Right,
        Ordering::Equal => Side::OnLine,
    })
}

const TANGENT_TOL: f64 = 1e-14;

/// Intersections of the two boundary circles, Left of `a→b` first.
pub fn disk_disk_intersections(
    a: impl Into<WeightedPoint>,
    b: impl Into<WeightedPoint>,
) -> Result<Vec<Point2>, GeomError> {
    let (a, b) = (a.into(), b.into());
    if a.pos == b.pos {
        return Err(GeomError::CoincidentCenters);
    }
    let (ra, rb) = (a.radius(), b.radius());
    let d2 = a.pos.dist2(b.pos);
    let d = d2.sqrt();
    let scale = ra.max(rb).powi(2);
    if d > ra + rb && (d - ra - rb) * (d + ra + rb) > TANGENT_TOL * scale {
        return Ok(Vec::new());
    }
    if d < (ra - rb).abs() && (ra - rb).powi(2) - d2 > TANGENT_TOL * scale {
        return Ok(Vec::new());
    }
    let along = (d2 + a.weight - b.weight) / (2.0 * d);
    let h2 = a.weight - along * along;
    let e = (b.pos - a.pos) * (1.0 / d);
    let base = a.pos + e * along;
    if h2.abs() <= TANGENT_TOL * scale || h2 < 0.0 {
        return Ok(vec![base]);
    }
    let off = e.perp() * h2.sqrt();
    Ok(vec![base + off, base - off])
}

/// Points where the circle crosses the closed segment, ordered along it.
pub fn disk_segment_intersections(
    a: impl Into<WeightedPoint>,
    seg: (Point2, Point2),
) -> Result<Vec<Point2>, GeomError> {
    let a = a.into();
    if seg.0 == seg.1 {
        return Err(GeomError::DegenerateSegment);
    }
    let d = seg.1 - seg.0;
    let f = seg.0 - a.pos;
    let qa = d.norm2();
    let qb = d.dot(f);
    let qc = f.norm2() - a.weight;
    let disc = qb * qb - qa * qc;
    let mut out = Vec::with_capacity(2);
    let push = |t: f64, out: &mut Vec<Point2>| {
        if (-1e-12..=1.0 + 1e-12).contains(&t) {
            out.push(seg.0 + d * t.clamp(0.0, 1.0));
        }
    };
    if (disc / qa).abs() <= TANGENT_TOL * a.weight {
        push(-qb / qa, &mut out);
    } else if disc > 0.0 {
        let s = disc.sqrt();
        push((-qb - s) / qa, &mut out);
        push((-qb + s) / qa, &mut out);
    }
    Ok(out)
}

/// Twice the signed area of `(a, b, c)`.
pub fn cross3(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Interior angles at `a`, `b`, `c` in degrees.
pub fn triangle_angles(a: Point2, b: Point2, c: Point2) -> [f64; 3] {
    let ang = |p: Point2, q: Point2, r: Point2| {
        let u = q - p;
        let v = r - p;
        u.cross(v).abs().atan2(u.dot(v)).to_degrees()
    };
    [ang(a, b, c), ang(b, c, a), ang(c, a, b)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64, y: f64, r: f64) -> WeightedPoint {
        WeightedPoint::disk(Point2::new(x, y), r)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn power_examples() {
        assert_eq!(power(s(0.0, 0.0, 1.0), s(2.0, 0.0, 1.0)), 2.0);
        assert_eq!(power(s(0.3, 0.1, 0.0), s(0.3, 0.1, 0.0)), 0.0);
        assert_eq!(power(s(0.0, 0.0, 2.0), s(1.0, 0.0, 0.0)), -3.0);
    }

    #[test]
    fn power_center_symmetric_cases() {
        let h = 3f64.sqrt() / 2.0;
        let c = power_center(s(0.0, 0.0, 0.1), s(1.0, 0.0, 0.1), s(0.5, h, 0.1)).unwrap();
        assert!(close(c.x, 0.5) && close(c.y, 3f64.sqrt() / 6.0));
        let c = power_center(s(0.0, 0.0, 0.2), s(1.0, 0.0, 0.2), s(0.0, 1.0, 0.2)).unwrap();
        assert!(close(c.x, 0.5) && close(c.y, 0.5));
    }

    #[test]
    fn power_center_collinear_fails() {
        let r = power_center(s(0.0, 0.0, 1.0), s(1.0, 0.0, 1.0), s(2.0, 0.0, 1.0));
        assert_eq!(r, Err(GeomError::CollinearSites));
    }

    #[test]
    fn triangle_power_equilateral() {
        let tri = |side: f64| {
            triangle_power(s(0.0, 0.0, 1.0), s(side, 0.0, 1.0), s(side / 2.0, side * 3f64.sqrt() / 2.0, 1.0)).unwrap()
        };
        assert!((tri(2.5) - (2.5f64 * 2.5 / 3.0 - 1.0)).abs() < 1e-12);
        assert!((tri(1.5) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn side_examples() {
        let seg = (Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        assert_eq!(side_of(seg, Point2::new(0.5, 1.0)), Ok(Side::Left));
        assert_eq!(side_of(seg, Point2::new(0.5, 0.0)), Ok(Side::OnLine));
        assert_eq!(side_of(seg, Point2::new(0.5, -1e-300)), Ok(Side::Right));
        assert_eq!(side_of((seg.0, seg.0), seg.1), Err(GeomError::DegenerateSegment));
    }

    #[test]
    fn disk_disk_examples() {
        let pts = disk_disk_intersections(s(0.0, 0.0, 1.0), s(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(close(pts[0].x, 0.5) && close(pts[0].y, 3f64.sqrt() / 2.0));
        assert!(close(pts[1].y, -(3f64.sqrt()) / 2.0));
        assert!(disk_disk_intersections(s(0.0, 0.0, 1.0), s(3.0, 0.0, 1.0)).unwrap().is_empty());
        let t = disk_disk_intersections(s(0.0, 0.0, 1.0), s(2.0, 0.0, 1.0)).unwrap();
        assert_eq!(t.len(), 1);
        assert!(close(t[0].x, 1.0) && close(t[0].y, 0.0));
        assert!(disk_disk_intersections(s(0.0, 0.0, 3.0), s(0.5, 0.0, 1.0)).unwrap().is_empty());
        assert_eq!(
            disk_disk_intersections(s(0.0, 0.0, 1.0), s(0.0, 0.0, 2.0)),
            Err(GeomError::CoincidentCenters)
        );
    }

    #[test]
    fn disk_segment_examples() {
        let c = s(0.0, 0.0, 1.0);
        let p = |x, y| Point2::new(x, y);
        let two = disk_segment_intersections(c, (p(-2.0, 0.0), p(2.0, 0.0))).unwrap();
        assert_eq!(two, vec![p(-1.0, 0.0), p(1.0, 0.0)]);
        let one = disk_segment_intersections(c, (p(0.0, 0.0), p(2.0, 0.0))).unwrap();
        assert_eq!(one, vec![p(1.0, 0.0)]);
        assert!(disk_segment_intersections(c, (p(5.0, 0.0), p(6.0, 0.0))).unwrap().is_empty());
        let rev = disk_segment_intersections(c, (p(2.0, 0.0), p(-2.0, 0.0))).unwrap();
        assert_eq!(rev, vec![p(1.0, 0.0), p(-1.0, 0.0)]);
    }

    #[test]
    fn angles_sum() {
        let a = triangle_angles(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0));
        assert!(close(a[0], 90.0) && close(a[1], 45.0) && close(a[2], 45.0));
    }
}
