//! Filtered exact predicates.
//!
//! Each predicate is evaluated in double precision first together with a
//! forward error bound. Only when the result is within the bound do we redo
//! the computation with arbitrary precision rationals.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::geom::Point2;

const ORIENT_ERR: f64 = 3.330_669_073_875_471_6e-16;
const POWER_ERR: f64 = 1e-14;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn sign_of(r: &BigRational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Sign of the orientation determinant of `(a, b, c)`.
///
/// `Greater` means counter-clockwise (c lies left of the directed line a→b).
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> Ordering {
    let detleft = (a.x - c.x) * (b.y - c.y);
    let detright = (a.y - c.y) * (b.x - c.x);
    let det = detleft - detright;
    let bound = ORIENT_ERR * (detleft.abs() + detright.abs());
    if det > bound {
        return Ordering::Greater;
    }
    if -det > bound {
        return Ordering::Less;
    }
    orient2d_exact(a, b, c)
}

/// Orientation evaluated entirely in rational arithmetic.
pub fn orient2d_exact(a: Point2, b: Point2, c: Point2) -> Ordering {
    let (ax, ay, bx, by, cx, cy) = (exact(a.x), exact(a.y), exact(b.x), exact(b.y), exact(c.x), exact(c.y));
    let det = (&ax - &cx) * (&by - &cy) - (&ay - &cy) * (&bx - &cx);
    sign_of(&det)
}

/// Power test of weighted point `d` against the orthogonal circle of the
/// counter-clockwise triangle `(a, b, c)`.
///
/// Returns `Greater` when `d` is in conflict with the triangle, i.e. its lifted
/// point lies strictly below the plane through the lifted triangle vertices.
pub fn power_test(
    a: (Point2, f64),
    b: (Point2, f64),
    c: (Point2, f64),
    d: (Point2, f64),
) -> Ordering {
    let (adx, ady) = (a.0.x - d.0.x, a.0.y - d.0.y);
    let (bdx, bdy) = (b.0.x - d.0.x, b.0.y - d.0.y);
    let (cdx, cdy) = (c.0.x - d.0.x, c.0.y - d.0.y);
    let (aw, bw, cw) = (a.1 - d.1, b.1 - d.1, c.1 - d.1);

    let alift = adx * adx + ady * ady - aw;
    let blift = bdx * bdx + bdy * bdy - bw;
    let clift = cdx * cdx + cdy * cdy - cw;

    let bc = bdx * cdy - cdx * bdy;
    let ca = cdx * ady - adx * cdy;
    let ab = adx * bdy - bdx * ady;
    let det = alift * bc + blift * ca + clift * ab;

    let aabs = adx * adx + ady * ady + aw.abs();
    let babs = bdx * bdx + bdy * bdy + bw.abs();
    let cabs = cdx * cdx + cdy * cdy + cw.abs();
    let permanent = ((bdx * cdy).abs() + (cdx * bdy).abs()) * aabs
        + ((cdx * ady).abs() + (adx * cdy).abs()) * babs
        + ((adx * bdy).abs() + (bdx * ady).abs()) * cabs;
    let bound = POWER_ERR * permanent;
    if det > bound {
        return Ordering::Greater;
    }
    if -det > bound {
        return Ordering::Less;
    }
    power_test_exact(a, b, c, d)
}

/// Power test evaluated entirely in rational arithmetic.
pub fn power_test_exact(
    a: (Point2, f64),
    b: (Point2, f64),
    c: (Point2, f64),
    d: (Point2, f64),
) -> Ordering {
    let (dx, dy, dw) = (exact(d.0.x), exact(d.0.y), exact(d.1));
    let row = |p: (Point2, f64)| {
        let x = exact(p.0.x) - &dx;
        let y = exact(p.0.y) - &dy;
        let lift = &x * &x + &y * &y - (exact(p.1) - &dw);
        (x, y, lift)
    };
    let (ax, ay, al) = row(a);
    let (bx, by, bl) = row(b);
    let (cx, cy, cl) = row(c);
    let det = al * (&bx * &cy - &cx * &by) + bl * (&cx * &ay - &ax * &cy) + cl * (&ax * &by - &bx * &ay);
    sign_of(&det)
}

/// Exact sign of `|p - q|² - s²` for the sum `s = r0 + r1` evaluated in
/// rationals; used to separate overlapping from disjoint disk pairs.
pub fn compare_dist_sum(p: Point2, q: Point2, r0: f64, r1: f64) -> Ordering {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let s = r0 + r1;
    let lhs = dx * dx + dy * dy;
    let rhs = s * s;
    let diff = lhs - rhs;
    if diff.abs() > 1e-14 * (lhs + rhs) {
        return diff.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    }
    let dx = exact(p.x) - exact(q.x);
    let dy = exact(p.y) - exact(q.y);
    let s = exact(r0) + exact(r1);
    sign_of(&(&dx * &dx + &dy * &dy - &s * &s))
}
