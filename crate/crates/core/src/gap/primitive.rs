use serde::{Deserialize, Serialize};

use crate::geom::{disk_disk_intersections, disk_segment_intersections, power_at, Point2, SiteId, WeightedPoint};
use crate::polygon::{area, clip_convex, clip_halfplane, convex_contains, convex_hull, inscribed_ngon, HalfPlane};
use crate::triangulation::{RegularTriangulation, TriangleRef};

use super::{area_in_domain, GapContext, GapError, GapPrimitive, VertexTag};

/// Relative tolerance for "on the circle".
const ON_CIRCLE: f64 = 1e-10;
/// Primitives below this fraction of `r_min²` are dropped.
const MIN_AREA: f64 = 1e-14;
/// Arc chords of the boundary pieces subtend at most π/16.
const ARC_SEGMENTS: usize = 32;

/// Convex hulls of the uncovered part of the owner triangle, built from the
/// corner points of that region: circle-circle and circle-edge crossings
/// inside the triangle that no owner disk contains.
///
/// A disk that crosses the opposite edge twice covers the wedge between its
/// center and the two crossings and may split the uncovered region in two.
/// The triangle is then cut along both sides of the wedge and each piece gets
/// its own hull, so one triangle can own several primitives.
pub fn extract_primitives(t: &RegularTriangulation, tri: TriangleRef) -> Result<Vec<GapPrimitive>, GapError> {
    if !t.is_live(tri) {
        return Err(GapError::StaleReference(tri));
    }
    extract_clipped(t, tri, None)
}

pub(crate) fn extract_clipped(
    t: &RegularTriangulation,
    tri: TriangleRef,
    clip: Option<(Point2, Point2)>,
) -> Result<Vec<GapPrimitive>, GapError> {
    let v = t.tris[tri.index as usize].v;
    let w: Vec<WeightedPoint> = v
        .iter()
        .map(|&x| {
            let (p, wt) = t.wp(x);
            WeightedPoint::new(p, wt)
        })
        .collect();
    let p: [Point2; 3] = [w[0].pos, w[1].pos, w[2].pos];
    let r: [f64; 3] = [w[0].radius(), w[1].radius(), w[2].radius()];
    let r_floor = r.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    let r_floor = if r_floor.is_finite() { r_floor } else { 1.0 };

    let mut cands: Vec<(Point2, VertexTag)> = Vec::with_capacity(18);
    for i in 0..3 {
        let j = (i + 1) % 3;
        if r[i] > 0.0 && r[j] > 0.0 {
            if let Ok(pts) = disk_disk_intersections(w[i], w[j]) {
                cands.extend(pts.into_iter().map(|x| (x, VertexTag::DiskDiskIntersection)));
            }
        }
    }
    let mut wedges = Vec::new();
    for i in 0..3 {
        if r[i] == 0.0 {
            cands.push((p[i], VertexTag::AuxiliarySplit));
            continue;
        }
        for e in 0..3 {
            let seg = (p[e], p[(e + 1) % 3]);
            if let Ok(pts) = disk_segment_intersections(w[i], seg) {
                if pts.len() == 2 && e == (i + 1) % 3 {
                    wedges.push((i, e, pts[0], pts[1]));
                }
                cands.extend(pts.into_iter().map(|x| (x, VertexTag::DiskEdgeIntersection)));
            }
        }
    }
    let scale = p[0].dist2(p[1]).max(p[1].dist2(p[2])).max(p[2].dist2(p[0]));
    let inside_tri = |x: Point2| (0..3).all(|e| (p[(e + 1) % 3] - p[e]).cross(x - p[e]) >= -1e-12 * scale);
    let uncovered = |x: Point2| (0..3).all(|i| r[i] == 0.0 || x.dist2(p[i]) >= r[i] * r[i] * (1.0 - ON_CIRCLE));
    cands.retain(|&(x, _)| inside_tri(x) && uncovered(x));

    let slack = 1e-12 * scale.sqrt();
    let mut pieces = vec![p.to_vec()];
    for (k, e, x1, x2) in wedges {
        let (a, b) = (p[e], p[(e + 1) % 3]);
        // Keep the side of the line center→crossing that holds the edge end.
        let side = |x: Point2, end: Point2| {
            if (x - p[k]).cross(end - p[k]) >= 0.0 {
                HalfPlane::left_of(p[k], x)
            } else {
                HalfPlane::left_of(x, p[k])
            }
        };
        let (xa, xb) = if x1.dist2(a) <= x2.dist2(a) { (x1, x2) } else { (x2, x1) };
        let (ha, hb) = (side(xa, a), side(xb, b));
        pieces = pieces
            .iter()
            .flat_map(|q| [clip_halfplane(q, &ha), clip_halfplane(q, &hb)])
            .map(|q| merge_close(q, slack))
            .filter(|q| q.len() >= 3)
            .collect();
    }

    let mut out = Vec::with_capacity(pieces.len());
    let mut largest = 0.0f64;
    for piece in &pieces {
        let mine: Vec<(Point2, VertexTag)> = if pieces.len() == 1 {
            cands.clone()
        } else {
            cands.iter().copied().filter(|&(x, _)| convex_contains(piece, x, slack)).collect()
        };
        let pts: Vec<Point2> = mine.iter().map(|c| c.0).collect();
            let mut hull = convex_hull(&pts);
        let mut tags: Vec<VertexTag> = hull
            .iter()
            .map(|h| mine.iter().find(|c| c.0 == *h).map(|c| c.1).unwrap_or(VertexTag::AuxiliarySplit))
            .collect();
        if hull.len() > 6 {
            log::warn!("gap primitive of {tri:?} has {} vertices", hull.len());
        }
        if let Some((lo, hi)) = clip {
            let boxp = [lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
            let clipped = clip_convex(&hull, &boxp);
            if clipped != hull {
                tags = clipped
                    .iter()
                    .map(|q| hull.iter().position(|h| h == q).map(|k| tags[k]).unwrap_or(VertexTag::AuxiliarySplit))
                    .collect();
                hull = dedup_ring(clipped);
            }
        }
        let a = if hull.len() >= 3 { area(&hull) } else { 0.0 };
        largest = largest.max(a);
        if hull.len() >= 3 && a >= MIN_AREA * r_floor * r_floor {
            out.push(GapPrimitive { owner: tri, vertices: hull, tags });
        }
    }
    if out.is_empty() {
        return Err(GapError::DegeneratePrimitive(tri, largest));
    }
    Ok(out)
}

/// Drops ring vertices within `tol` of their predecessor; clipping at an
/// existing vertex can emit a copy a few ulps away.
fn merge_close(mut v: Vec<Point2>, tol: f64) -> Vec<Point2> {
    v.dedup_by(|b, a| a.dist(*b) <= tol);
    while v.len() > 1 && v[0].dist(v[v.len() - 1]) <= tol {
        v.pop();
    }
    v
}

fn dedup_ring(mut v: Vec<Point2>) -> Vec<Point2> {
    v.dedup();
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    v
}

/// Uncovered part of one power cell that reaches the domain boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGap {
    pub site: SiteId,
    /// Cell clipped to the domain bounding box; convex and ccw.
    pub support: Vec<Point2>,
    /// Area of `(cell ∩ domain) − disk`, with the disk replaced by its
    /// inscribed 32-gon.
    pub area: f64,
    /// Corner of `cell ∩ domain` farthest outside the disk in power.
    pub witness: Point2,
}

/// Pieces `(cell ∩ domain) − disk` for the power cells that touch or leave a
/// bounded domain. Empty on the periodic square.
pub fn clip_boundary_gaps(t: &RegularTriangulation, ctx: &GapContext) -> Result<Vec<BoundaryGap>, GapError> {
    let Some(segs) = ctx.segments.as_ref() else { return Ok(Vec::new()) };
    for ring in ctx.domain.rings() {
        if !crate::polygon::ring_is_simple(&ring) {
            return Err(GapError::InvalidPolygon("self-intersecting ring".into()));
        }
    }
    let (lo, hi) = ctx.domain.bbox();
    let boxp = [lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
    let mut out = Vec::new();
    let ids: Vec<SiteId> = t.sites().map(|s| s.id).collect();
    for id in ids {
        let site = *t.site(id).expect("listed site");
        let v = t.site_vertex(id).expect("listed site");
        let cell: Vec<Point2> = t.star(v).iter().map(|&k| t.tris[k as usize].center).collect();
        let interior = cell.iter().all(|&c| ctx.domain.contains(c)) && !segs.touches_convex(&cell);
        if interior {
            continue;
        }
        let wi = site.as_weighted();
        let deepest = segs
            .convex_cut_points(&ctx.domain, &cell)
            .into_iter()
            .map(|x| (power_at(x, wi), x))
            .filter(|&(p, _)| p > ctx.epsilon)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        let Some((_, witness)) = deepest else { continue };
        let support = clip_convex(&cell, &boxp);
        if support.len() < 3 {
            continue;
        }
        let disk = clip_convex(&inscribed_ngon(site.center, site.radius(), ARC_SEGMENTS), &support);
        let gap_area = area_in_domain(&ctx.domain, &support) - if disk.len() >= 3 { area_in_domain(&ctx.domain, &disk) } else { 0.0 };
        out.push(BoundaryGap { site: id, support, area: gap_area.max(0.0), witness });
    }
    Ok(out)
}
