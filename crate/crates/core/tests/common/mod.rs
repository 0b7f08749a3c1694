//! Oracles shared by the integration tests. Everything here is computed by
//! brute force from raw coordinates, independently of the triangulation.

#![allow(dead_code)]

use gapmps::density::DensityField;
use gapmps::domain::SamplingDomain;
use gapmps::gap::{default_epsilon, GapContext, GapPrimitive, GapState, GapTriangle};
use gapmps::triangulation::{RegularTriangulation, TriangleRef};
use gapmps::{Point2, SiteId, WeightedSite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform bucket grid over the domain's bounding box. Items are stored in
/// every cell their bounding box touches; on the torus each copy remembers
/// the period shift that brings a query point into the item's frame.
pub struct Buckets<T> {
    lo: Point2,
    h: f64,
    nx: usize,
    ny: usize,
    periodic: bool,
    cells: Vec<Vec<(T, Point2)>>,
}

impl<T: Clone> Buckets<T> {
    pub fn new(domain: &SamplingDomain, h: f64) -> Self {
        let (lo, hi) = domain.bbox();
        let nx = (((hi.x - lo.x) / h).floor() as usize).max(1);
        let ny = (((hi.y - lo.y) / h).floor() as usize).max(1);
        let h = ((hi.x - lo.x) / nx as f64).max((hi.y - lo.y) / ny as f64);
        Buckets { lo, h, nx, ny, periodic: domain.is_periodic(), cells: vec![Vec::new(); nx * ny] }
    }

    pub fn insert(&mut self, item: T, min: Point2, max: Point2) {
        let ix = |v: f64, o: f64| ((v - o) / self.h).floor() as i64;
        let (x0, x1) = (ix(min.x, self.lo.x), ix(max.x, self.lo.x));
        let (y0, y1) = (ix(min.y, self.lo.y), ix(max.y, self.lo.y));
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let mut seen = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (cx, cy, shift) = if self.periodic {
                    let s = Point2::new(x.div_euclid(nx) as f64, y.div_euclid(ny) as f64);
                    (x.rem_euclid(nx), y.rem_euclid(ny), s)
                } else {
                    (x.clamp(0, nx - 1), y.clamp(0, ny - 1), Point2::new(0.0, 0.0))
                };
                let cell = (cy * nx + cx) as usize;
                if seen.contains(&(cell, shift.x.to_bits(), shift.y.to_bits())) {
                    continue;
                }
                seen.push((cell, shift.x.to_bits(), shift.y.to_bits()));
                self.cells[cell].push((item.clone(), shift));
            }
        }
    }

    /// Items near `p` with the shift to add to `p`. On the torus `p` must lie
    /// in the unit square.
    pub fn query(&self, p: Point2) -> &[(T, Point2)] {
        let cx = (((p.x - self.lo.x) / self.h).floor() as i64).clamp(0, self.nx as i64 - 1);
        let cy = (((p.y - self.lo.y) / self.h).floor() as i64).clamp(0, self.ny as i64 - 1);
        &self.cells[cy as usize * self.nx + cx as usize]
    }
}

pub fn wrap(p: Point2) -> Point2 {
    Point2::new(p.x.rem_euclid(1.0), p.y.rem_euclid(1.0))
}

/// Disk union membership by exhaustive bucket search.
pub struct DiskOracle {
    buckets: Buckets<(Point2, f64)>,
    periodic: bool,
}

impl DiskOracle {
    pub fn new(sites: &[WeightedSite], domain: &SamplingDomain) -> Self {
        let r_min = sites.iter().map(|s| s.radius()).fold(f64::INFINITY, f64::min);
        let mut buckets = Buckets::new(domain, 2.0 * r_min);
        for s in sites {
            let r = Point2::new(s.radius(), s.radius());
            buckets.insert((s.center, s.radius()), s.center - r, s.center + r);
        }
        DiskOracle { buckets, periodic: domain.is_periodic() }
    }

    /// `min_i |p - c_i|² - r_i²` over the disks near `p`; positive means
    /// uncovered. Infinite when no disk is near.
    pub fn min_power(&self, p: Point2) -> f64 {
        let p = if self.periodic { wrap(p) } else { p };
        self.buckets
            .query(p)
            .iter()
            .map(|&((c, r), s)| (p + s).dist2(c) - r * r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn covered(&self, p: Point2, slack: f64) -> bool {
        self.min_power(p) <= slack
    }
}

/// Number of uncovered probes on a `res × res` lattice of cell centers over
/// the domain's bounding box, counting only probes inside the domain.
pub fn grid_audit(sites: &[WeightedSite], domain: &SamplingDomain, res: usize) -> usize {
    let oracle = DiskOracle::new(sites, domain);
    let r_min = sites.iter().map(|s| s.radius()).fold(f64::INFINITY, f64::min);
    let (lo, hi) = domain.bbox();
    let mut uncovered = 0;
    for j in 0..res {
        let y = lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / res as f64;
        for i in 0..res {
            let p = Point2::new(lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / res as f64, y);
            if !domain.is_periodic() && !domain.contains(p) {
                continue;
            }
            if !oracle.covered(p, 1e-9 * r_min * r_min) {
                uncovered += 1;
            }
        }
    }
    uncovered
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn shoelace(p: &[Point2]) -> f64 {
    (0..p.len()).map(|i| p[i].x * p[(i + 1) % p.len()].y - p[(i + 1) % p.len()].x * p[i].y).sum::<f64>() / 2.0
}

/// Sutherland–Hodgman clip of `subject` by the ccw convex polygon `clip`.
fn clip(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        for k in 0..input.len() {
            let (p, q) = (input[k], input[(k + 1) % input.len()]);
            let (sp, sq) = (cross(a, b, p), cross(a, b, q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                out.push(p.lerp(q, sp / (sp - sq)));
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

fn contains(poly: &[Point2], q: Point2, slack: f64) -> bool {
    (0..poly.len()).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        cross(a, b, q) >= -slack * a.dist(b)
    })
}

#[derive(Debug, Default)]
pub struct Decomposition {
    pub primitives: usize,
    pub max_vertices: usize,
    /// Primitives that are not convex ccw with 3..=6 vertices.
    pub malformed: usize,
    /// Primitive vertices strictly inside an owner disk.
    pub inside_owner: usize,
    /// Pairs with interior overlap.
    pub overlaps: usize,
    pub probes: usize,
    /// Uncovered probes outside every primitive.
    pub misses: usize,
    /// The first few missed probes.
    pub missed: Vec<Point2>,
}

/// Checks the gap decomposition of a periodic triangulation: shape of each
/// primitive, pairwise disjointness, and Monte Carlo coverage of the
/// uncovered area with `probes` uncovered points drawn from the gap
/// triangles.
pub fn check_decomposition(
    t: &RegularTriangulation,
    ctx: &GapContext,
    gaps: &[GapTriangle],
    prims: &[GapPrimitive],
    probes: usize,
    seed: u64,
) -> Decomposition {
    assert!(t.is_periodic());
    let sites: Vec<WeightedSite> = t.sites().copied().collect();
    let r_min = sites.iter().map(|s| s.radius()).fold(f64::INFINITY, f64::min);
    let scale = r_min * r_min;
    let mut d = Decomposition { primitives: prims.len(), ..Default::default() };

    for p in prims {
        let v = &p.vertices;
        d.max_vertices = d.max_vertices.max(v.len());
        let n = v.len();
        let turns = (0..n).all(|i| cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) >= -1e-12 * scale);
        let winding: f64 = (0..n)
            .map(|i| {
                let (a, b) = (v[(i + 1) % n] - v[i], v[(i + 2) % n] - v[(i + 1) % n]);
                a.cross(b).atan2(a.dot(b))
            })
            .sum();
        if !(3..=6).contains(&n) || !turns || shoelace(v) <= 0.0 || (winding - std::f64::consts::TAU).abs() > 1e-6 {
            d.malformed += 1;
        }
        for w in t.tri_vertices(p.owner) {
            let r = w.radius();
            if v.iter().any(|&q| q.dist(w.pos) < r * (1.0 - 1e-10)) {
                d.inside_owner += 1;
            }
        }
    }

    let mut idx: Buckets<usize> = Buckets::new(&ctx.domain, 2.0 * r_min);
    let bbox = |v: &[Point2]| {
        let lo = v.iter().fold(Point2::new(f64::INFINITY, f64::INFINITY), |m, q| Point2::new(m.x.min(q.x), m.y.min(q.y)));
        let hi = v.iter().fold(Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, q| Point2::new(m.x.max(q.x), m.y.max(q.y)));
        (lo, hi)
    };
    for (i, p) in prims.iter().enumerate() {
        let (lo, hi) = bbox(&p.vertices);
        idx.insert(i, lo, hi);
    }

    // Disjointness: test each primitive against everything bucketed near
    // its vertices, on every period copy.
    let mut pairs = std::collections::BTreeSet::new();
    for (i, p) in prims.iter().enumerate() {
        for &q in &p.vertices {
            for &(j, s) in idx.query(wrap(q)) {
                if j == i {
                    continue;
                }
                let shift = wrap(q) + s - q;
                let key = (i.min(j), i.max(j), (shift.x.round() as i64, shift.y.round() as i64));
                if !pairs.insert(key) {
                    continue;
                }
                let moved: Vec<Point2> = p.vertices.iter().map(|&v| v + shift).collect();
                if shoelace(&clip(&moved, &prims[j].vertices)) > 1e-9 * scale {
                    d.overlaps += 1;
                }
            }
        }
    }

    // Coverage by rejection sampling over the gap triangles, area-weighted.
    if gaps.is_empty() {
        return d;
    }
    let oracle = DiskOracle::new(&sites, &ctx.domain);
    let tris: Vec<[Point2; 3]> = gaps.iter().map(|g| t.tri_vertices(g.tri).map(|v| v.pos)).collect();
    let mut cum = Vec::with_capacity(tris.len());
    let mut acc = 0.0;
    for tr in &tris {
        acc += shoelace(tr).abs();
        cum.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0usize;
    while d.probes < probes && attempts < 1000 * probes {
        attempts += 1;
        let k = cum.partition_point(|&c| c < rng.gen::<f64>() * acc).min(tris.len() - 1);
        let [a, b, c] = tris[k];
        let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
        if u + v > 1.0 {
            (u, v) = (1.0 - u, 1.0 - v);
        }
        let q = a + (b - a) * u + (c - a) * v;
        if oracle.min_power(q) <= 1e-9 * scale {
            continue;
        }
        d.probes += 1;
        let w = wrap(q);
        if !idx.query(w).iter().any(|&(j, s)| contains(&prims[j].vertices, w + s, 1e-12 * r_min)) {
            d.misses += 1;
            if d.missed.len() < 5 {
                d.missed.push(w);
            }
        }
    }
    d
}

/// Pairs `i ≠ j` with `|c_i - c_j| < max(r_i, r_j)`, by exhaustive bucket
/// search.
pub fn separation_violations(sites: &[WeightedSite], domain: &SamplingDomain) -> usize {
    let r_max = sites.iter().map(|s| s.radius()).fold(0.0, f64::max);
    let mut b: Buckets<usize> = Buckets::new(domain, r_max);
    for (i, s) in sites.iter().enumerate() {
        let r = Point2::new(r_max, r_max);
        b.insert(i, s.center - r, s.center + r);
    }
    let mut bad = 0;
    for (i, s) in sites.iter().enumerate() {
        let c = if domain.is_periodic() { wrap(s.center) } else { s.center };
        for &(j, shift) in b.query(c) {
            let m = s.radius().max(sites[j].radius());
            if j > i && (c + shift).dist2(sites[j].center) < m * m * (1.0 - 1e-12) {
                bad += 1;
            }
        }
    }
    bad
}

pub fn random_sites(n: usize, r: (f64, f64), seed: u64) -> Vec<WeightedSite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| WeightedSite::new(SiteId(i as u32), Point2::new(rng.gen(), rng.gen()), rng.gen_range(r.0..=r.1))).collect()
}

/// Orientation-preserving key of a triangle by site ids and period offsets.
fn keys(t: &RegularTriangulation, tris: impl IntoIterator<Item = TriangleRef>) -> Vec<[(i64, i8, i8, u64, u64); 3]> {
    let mut out: Vec<_> = tris
        .into_iter()
        .map(|r| {
            let v = t.tri_vertices(r).map(|v| match v.site {
                Some(s) => (s.0 as i64, v.offset.0, v.offset.1, 0, 0),
                None => (-1, 0, 0, v.pos.x.to_bits(), v.pos.y.to_bits()),
            });
            let k = (0..3).min_by_key(|&k| v[k]).unwrap();
            let base = (v[k].1, v[k].2);
            [0, 1, 2].map(|j| {
                let (s, ox, oy, px, py) = v[(k + j) % 3];
                if s < 0 {
                    (s, ox, oy, px, py)
                } else {
                    (s, ox - base.0, oy - base.1, px, py)
                }
            })
        })
        .collect();
    out.sort_unstable();
    out
}

/// Random insert/remove/move/radius operations; after each one the
/// triangulation and gap state must equal a rebuild from the same sites.
pub fn differential(domain: &SamplingDomain, ops: usize, seed: u64, check_every: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r_lo, r_hi) = (0.01, 0.03);
    let eps = default_epsilon(r_lo);
    let start = random_sites(120, (r_lo, r_lo), seed ^ 0xabc);
    let mut t = RegularTriangulation::build(&start, domain).map_err(|e| e.to_string())?;
    let mut state = GapState::new(&t, eps);
    t.clear_journal();
    let (lo, hi) = domain.bbox();
    let clamp = |p: Point2| {
        if domain.is_periodic() {
            wrap(p)
        } else {
            Point2::new(p.x.clamp(lo.x + 1e-6, hi.x - 1e-6), p.y.clamp(lo.y + 1e-6, hi.y - 1e-6))
        }
    };
    let mut applied = 0;
    for step in 0..ops {
        let ids: Vec<SiteId> = t.sites().map(|s| s.id).collect();
        let id = ids[rng.gen_range(0..ids.len())];
        let ok = match rng.gen_range(0..4) {
            0 => t.insert(clamp(Point2::new(rng.gen(), rng.gen())), rng.gen_range(r_lo..r_hi), None).is_ok(),
            1 => ids.len() > 60 && t.remove(id).is_ok(),
            2 => {
                let c = t.site(id).unwrap().center;
                t.move_site(id, clamp(c + Point2::new(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02)))).is_ok()
            }
            _ => t.set_radius(id, rng.gen_range(r_lo..r_hi)).is_ok(),
        };
        applied += ok as usize;
        let j = t.take_journal();
        state.recompute_local(&t, &j).map_err(|e| e.to_string())?;
        if step % check_every != 0 && step + 1 != ops {
            continue;
        }
        t.audit().map_err(|e| format!("step {step}: {e}"))?;
        if state.gaps() != GapState::new(&t, eps).gaps() {
            return Err(format!("step {step}: local gap state differs from a full recompute"));
        }
        let sites: Vec<WeightedSite> = t.sites().copied().collect();
        let fresh = RegularTriangulation::build(&sites, domain).map_err(|e| format!("step {step}: rebuild failed: {e}"))?;
        if keys(&t, t.triangles()) != keys(&fresh, fresh.triangles()) {
            return Err(format!("step {step}: triangles differ from a rebuild"));
        }
        let g = |t: &RegularTriangulation, s: &GapState| keys(t, s.gaps().into_iter().map(|g| g.tri));
        if g(&t, &state) != g(&fresh, &GapState::new(&fresh, eps)) {
            return Err(format!("step {step}: gap triangles differ from a rebuild"));
        }
    }
    Ok(applied)
}

/// Random bilinear density on the unit square whose radii span
/// `[r_min, ratio · r_min]`.
pub fn adaptive_density(r_min: f64, ratio: f64, seed: u64) -> DensityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 6;
    let mut radii: Vec<f64> = (0..n * n).map(|_| r_min * ratio.powf(rng.gen::<f64>())).collect();
    // Pin both ends of the range.
    radii[0] = r_min;
    radii[n * n / 2 + n / 2] = r_min * ratio;
    let values = radii.iter().map(|r| 1.0 / (r * r)).collect();
    DensityField::grid(n, n, values, Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)).unwrap()
}
