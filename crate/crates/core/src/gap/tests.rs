use super::*;
use crate::geom::{SiteId, WeightedSite};
use crate::polygon::convex_contains;
use crate::triangulation::Journal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn site(id: u32, x: f64, y: f64, r: f64) -> WeightedSite {
    WeightedSite::new(SiteId(id), Point2::new(x, y), r)
}

fn big_box() -> SamplingDomain {
    SamplingDomain::new_box(Point2::new(-5.0, -5.0), Point2::new(5.0, 5.0)).unwrap()
}

fn equilateral(side: f64) -> Vec<WeightedSite> {
    let h = side * 3f64.sqrt() / 2.0;
    vec![site(0, 0.0, 0.0, 1.0), site(1, side, 0.0, 1.0), site(2, side / 2.0, h, 1.0)]
}

fn real_triangle(t: &RegularTriangulation) -> TriangleRef {
    let ts = t.triangles();
    assert_eq!(ts.len(), 1);
    ts[0]
}

/// Triangle with the given sites as vertices.
fn find_tri(t: &RegularTriangulation, ids: [u32; 3]) -> TriangleRef {
    t.triangles()
        .into_iter()
        .find(|&r| {
            let mut v: Vec<u32> = t.tri_vertices(r).iter().map(|x| x.site.unwrap().0).collect();
            v.sort_unstable();
            let mut w = ids.to_vec();
            w.sort_unstable();
            v == w
        })
        .expect("triangle present")
}

#[test]
fn equilateral_gap_power_matches_circumradius() {
    let t = RegularTriangulation::build(&equilateral(2.5), &big_box()).unwrap();
    let gaps = detect_gaps(&t, &big_box(), default_epsilon(1.0));
    assert_eq!(gaps.len(), 1);
    let r = 2.5 / 3f64.sqrt();
    assert!((gaps[0].power - (r * r - 1.0)).abs() < 1e-12);
    assert!((gaps[0].power - 1.083_333_333_333_333).abs() < 1e-9);

    let t = RegularTriangulation::build(&equilateral(1.5), &big_box()).unwrap();
    assert!(detect_gaps(&t, &big_box(), default_epsilon(1.0)).is_empty());
    let r = 1.5 / 3f64.sqrt();
    assert!((t.tri_power(real_triangle(&t)) - (r * r - 1.0)).abs() < 1e-12);
}

#[test]
fn six_vertex_primitive_for_wide_triangle() {
    let t = RegularTriangulation::build(&equilateral(2.5), &big_box()).unwrap();
    let p = extract_primitives(&t, real_triangle(&t)).unwrap().remove(0);
    assert_eq!(p.vertices.len(), 6);
    let sites = equilateral(2.5);
    for v in &p.vertices {
        let mut d: Vec<f64> = sites.iter().map(|s| s.center.dist(*v)).collect();
        d.sort_by(f64::total_cmp);
        assert!((d[0] - 1.0).abs() < 1e-12, "{d:?}");
        assert!(p.tags.iter().all(|&t| t == VertexTag::DiskEdgeIntersection));
    }
    // Oracle: triangle area minus three unit-leg corner triangles at 60°.
    let s = 2.5f64;
    let expected = s * s * 3f64.sqrt() / 4.0 - 3.0 * 3f64.sqrt() / 4.0;
    let ring: Vec<(f64, f64)> = p.vertices.iter().map(|v| (v.x, v.y)).collect();
    let shoelace: f64 = (0..6).map(|i| ring[i].0 * ring[(i + 1) % 6].1 - ring[(i + 1) % 6].0 * ring[i].1).sum::<f64>() / 2.0;
    assert!((shoelace - expected).abs() < 1e-12);
}

#[test]
fn overlapping_pairs_give_triangle_primitive() {
    let t = RegularTriangulation::build(&equilateral(1.8), &big_box()).unwrap();
    let tri = real_triangle(&t);
    assert!(t.tri_power(tri) > 0.0);
    let p = extract_primitives(&t, tri).unwrap().remove(0);
    assert_eq!(p.vertices.len(), 3);
    assert!(p.tags.iter().all(|&t| t == VertexTag::DiskDiskIntersection));
}

#[test]
fn edge_classes_follow_the_connectivity_rules() {
    let d = big_box();
    let eps = default_epsilon(0.1);
    // Long edge, centers on opposite sides.
    let s = vec![site(0, 0.0, 0.0, 1.0), site(1, 3.0, 0.0, 1.0), site(2, 1.5, 2.0, 1.0), site(3, 1.5, -2.0, 1.0)];
    let t = RegularTriangulation::build(&s, &d).unwrap();
    let (a, b) = (find_tri(&t, [0, 1, 2]), find_tri(&t, [0, 1, 3]));
    assert_eq!(classify_edge(&t, a, b).unwrap(), EdgeClass::InnerOpposite);

    // Short edge, both centers below it.
    let s = vec![site(0, 0.0, 0.0, 1.0), site(1, 1.8, 0.0, 1.0), site(2, 0.9, 0.5, 1.02), site(3, 0.9, -3.0, 1.0)];
    let t = RegularTriangulation::build(&s, &d).unwrap();
    let (a, b) = (find_tri(&t, [0, 1, 2]), find_tri(&t, [0, 1, 3]));
    assert_eq!(classify_edge(&t, a, b).unwrap(), EdgeClass::InnerSameSide);
    let gaps = detect_gaps(&t, &d, eps);
    assert_eq!(gaps.len(), 2);
    assert_eq!(connected_components(&gaps, &t).unwrap().len(), 1);
    assert_eq!(cluster_igs(&gaps, &t).unwrap().len(), 1);

    // Short edge, centers on opposite sides: separate gaps in one set.
    let s = vec![site(0, 0.0, 0.0, 1.0), site(1, 1.8, 0.0, 1.0), site(2, 0.9, 2.5, 1.0), site(3, 0.9, -2.5, 1.0)];
    let t = RegularTriangulation::build(&s, &d).unwrap();
    let (a, b) = (find_tri(&t, [0, 1, 2]), find_tri(&t, [0, 1, 3]));
    assert_eq!(classify_edge(&t, a, b).unwrap(), EdgeClass::Boundary);
    let gaps = detect_gaps(&t, &d, eps);
    assert_eq!(gaps.len(), 2);
    assert_eq!(connected_components(&gaps, &t).unwrap().len(), 2);
    assert_eq!(cluster_igs(&gaps, &t).unwrap().len(), 1);

    assert!(matches!(classify_edge(&t, a, a), Err(GapError::NotNeighbors(..))));
}

#[test]
fn center_in_neighbor_shares_segment_with_opposite_orientation() {
    let s = vec![site(0, 0.0, 0.0, 1.0), site(1, 3.0, 0.0, 1.0), site(2, 1.5, 0.6, 0.3), site(3, 1.5, -3.0, 1.0)];
    let t = RegularTriangulation::build(&s, &big_box()).unwrap();
    let t0 = find_tri(&t, [0, 1, 2]);
    let t1 = find_tri(&t, [0, 1, 3]);
    let c0 = t.tri_center(t0);
    let v1: Vec<Point2> = t.tri_vertices(t1).iter().map(|v| v.pos).collect();
    assert!(convex_contains(&v1, c0, 0.0), "power center of t0 must lie in t1");
    let p0 = extract_primitives(&t, t0).unwrap().remove(0);
    let p1 = extract_primitives(&t, t1).unwrap().remove(0);
    let a = Point2::new(1.0, 0.0);
    let b = Point2::new(2.0, 0.0);
    let directed = |poly: &[Point2], from: Point2, to: Point2| {
        let n = poly.len();
        (0..n).any(|i| poly[i].dist(from) < 1e-12 && poly[(i + 1) % n].dist(to) < 1e-12)
    };
    assert!(directed(&p0.vertices, a, b));
    assert!(directed(&p1.vertices, b, a));
}

#[test]
fn disk_across_the_opposite_edge_splits_the_primitive() {
    let s = vec![site(0, 0.0, 0.0, 1.0), site(1, 4.0, 0.0, 1.0), site(2, 2.0, -0.8, 1.2)];
    let t = RegularTriangulation::build(&s, &big_box()).unwrap();
    let prims = extract_primitives(&t, real_triangle(&t)).unwrap();
    assert_eq!(prims.len(), 2);
    // Each piece is bounded by the edge crossings of the near disk and the
    // middle disk plus the crossing of those two circles.
    let cut = 0.8f64.sqrt();
    let mut xs: Vec<f64> = prims.iter().flat_map(|p| p.vertices.iter().filter(|v| v.y.abs() < 1e-12).map(|v| v.x)).collect();
    xs.sort_by(f64::total_cmp);
    let want = [1.0, 2.0 - cut, 2.0 + cut, 3.0];
    assert!(xs.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{xs:?}");
    for p in &prims {
        assert_eq!(p.vertices.len(), 3);
        assert!(p.tags.contains(&VertexTag::DiskDiskIntersection));
        for v in &p.vertices {
            assert!(s.iter().all(|d| d.center.dist(*v) >= d.radius() * (1.0 - 1e-12)));
        }
    }
}

#[test]
fn stale_references_are_reported() {
    let mut t = RegularTriangulation::build(&equilateral(2.5), &big_box()).unwrap();
    let gaps = detect_gaps(&t, &big_box(), 1e-12);
    t.insert(gaps[0].power_center, 0.5, None).unwrap();
    assert!(matches!(cluster_igs(&gaps, &t), Err(GapError::StaleReference(_))));
    assert!(matches!(extract_primitives(&t, gaps[0].tri), Err(GapError::StaleReference(_))));
}

fn random_periodic(n: usize, r: f64, seed: u64) -> (RegularTriangulation, Vec<WeightedSite>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = SamplingDomain::PeriodicUnitSquare;
    let mut s: Vec<WeightedSite> = Vec::new();
    let mut tries = 0;
    while s.len() < n && tries < 100 * n {
        tries += 1;
        let p = Point2::new(rng.gen(), rng.gen());
        if s.iter().all(|q| d.distance2(q.center, p) >= r * r) {
            s.push(site(s.len() as u32, p.x, p.y, r));
        }
    }
    (RegularTriangulation::build(&s, &d).unwrap(), s)
}

/// Site/offset keys of a triangle's vertices, translated so the first
/// listed vertex sits in the fundamental tile.
fn vertex_keys(t: &RegularTriangulation, r: TriangleRef) -> Vec<(u32, i8, i8)> {
    t.tri_vertices(r).iter().map(|v| (v.site.unwrap().0, v.offset.0, v.offset.1)).collect()
}

#[test]
fn igs_match_vertex_sharing_components_oracle() {
    let (t, _) = random_periodic(150, 0.05, 3);
    let gaps = detect_gaps(&t, &SamplingDomain::PeriodicUnitSquare, 1e-14);
    assert!(gaps.len() > 5);
    let sets = cluster_igs(&gaps, &t).unwrap();
    // Oracle: two gap triangles are adjacent when some vertex of one is a
    // vertex of the other after a common integer translation.
    let keys: Vec<Vec<(u32, i8, i8)>> = gaps.iter().map(|g| vertex_keys(&t, g.tri)).collect();
    let adjacent = |a: &Vec<(u32, i8, i8)>, b: &Vec<(u32, i8, i8)>| {
        a.iter().any(|x| {
            b.iter().any(|y| {
                x.0 == y.0 && {
                    let (dx, dy) = (y.1 - x.1, y.2 - x.2);
                    // Translating b by -(dx, dy) must keep it a real copy.
                    b.iter().all(|z| (z.1 - dx).abs() <= 1 && (z.2 - dy).abs() <= 1) || a.iter().all(|z| (z.1 + dx).abs() <= 1 && (z.2 + dy).abs() <= 1)
                }
            })
        })
    };
    let n = gaps.len();
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if comp[y] == usize::MAX && adjacent(&keys[x], &keys[y]) {
                    comp[y] = ncomp;
                    stack.push(y);
                }
            }
        }
        ncomp += 1;
    }
    assert_eq!(sets.len(), ncomp);
    let mut all: Vec<TriangleRef> = sets.iter().flatten().map(|g| g.tri).collect();
    all.sort();
    let mut want: Vec<TriangleRef> = gaps.iter().map(|g| g.tri).collect();
    want.sort();
    assert_eq!(all, want);
    // Every component lies in exactly one set.
    let comps = connected_components(&gaps, &t).unwrap();
    for c in &comps {
        let owners: std::collections::HashSet<usize> =
            c.iter().map(|g| sets.iter().position(|s| s.iter().any(|x| x.tri == g.tri)).unwrap()).collect();
        assert_eq!(owners.len(), 1);
    }
    assert!(comps.len() >= sets.len());
}

#[test]
fn incremental_state_matches_full_recompute() {
    let (mut t, _) = random_periodic(200, 0.04, 8);
    let eps = 1e-14;
    let mut state = GapState::new(&t, eps);
    t.clear_journal();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for step in 0..60 {
        if step % 3 == 2 {
            let ids: Vec<SiteId> = t.sites().map(|s| s.id).collect();
            t.remove(ids[rng.gen_range(0..ids.len())]).unwrap();
        } else {
            let g = state.gaps();
            if g.is_empty() {
                break;
            }
            let c = g[rng.gen_range(0..g.len())].power_center;
            let _ = t.insert(c, 0.01, None);
        }
        let j = t.take_journal();
        state.recompute_local(&t, &j).unwrap();
        assert_eq!(state.gaps(), GapState::new(&t, eps).gaps(), "step {step}");
    }
    // A no-op batch leaves the state unchanged.
    let before = state.clone();
    state.recompute_local(&t, &Journal::default()).unwrap();
    assert_eq!(state.gaps(), before.gaps());
}

#[test]
fn removal_exposes_area_covered_by_primitives() {
    let (mut t, sites) = random_periodic(400, 0.06, 21);
    let d = SamplingDomain::PeriodicUnitSquare;
    let ctx = GapContext::new(&d, 1e-14);
    let victim = sites[17];
    t.remove(victim.id).unwrap();
    let (prims, _) = extract_all_primitives(&t, &ctx).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let live: Vec<WeightedSite> = t.sites().copied().collect();
    let mut hits = 0;
    for _ in 0..2000 {
        let a = rng.gen::<f64>() * std::f64::consts::TAU;
        let rr = victim.radius() * rng.gen::<f64>().sqrt();
        let q = d.wrap(victim.center + Point2::new(a.cos(), a.sin()) * rr);
        if live.iter().any(|s| d.distance2(s.center, q) < s.radius() * s.radius()) {
            continue;
        }
        hits += 1;
        let inside = prims.iter().any(|p| {
            [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)]
                .iter()
                .any(|&(ox, oy)| convex_contains(&p.vertices, q + Point2::new(ox, oy), 1e-12))
        });
        assert!(inside, "uncovered point {q:?} outside all primitives");
    }
    assert!(hits > 0);
}

#[test]
fn boundary_gap_of_single_disk_in_square() {
    let d = SamplingDomain::unit_box();
    let t = RegularTriangulation::build(&[site(0, 0.5, 0.5, 0.3)], &d).unwrap();
    let ctx = GapContext::new(&d, default_epsilon(0.3));
    let g = clip_boundary_gaps(&t, &ctx).unwrap();
    assert_eq!(g.len(), 1);
    let exact = 1.0 - std::f64::consts::PI * 0.09;
    assert!((g[0].area - exact).abs() / exact < 0.01, "{} vs {exact}", g[0].area);
    assert!(!is_maximal(&t, &ctx));
}

#[test]
fn covered_boundary_has_no_boundary_gaps() {
    let d = SamplingDomain::unit_box();
    let mut s = Vec::new();
    let r = 0.2;
    let step = 0.15;
    let n = (1.0 / step) as usize + 1;
    for j in 0..=n {
        for i in 0..=n {
            let x = (i as f64 * step).min(1.0);
            let y = (j as f64 * step).min(1.0);
            if s.iter().all(|q: &WeightedSite| q.center.dist(Point2::new(x, y)) >= r * 0.5) {
                s.push(site(s.len() as u32, x, y, r));
            }
        }
    }
    let t = RegularTriangulation::build(&s, &d).unwrap();
    let ctx = GapContext::new(&d, default_epsilon(r));
    assert!(clip_boundary_gaps(&t, &ctx).unwrap().is_empty());
    assert!(is_maximal(&t, &ctx));
}

#[test]
fn l_shape_boundary_gaps_cover_uncovered_cell_points() {
    let outer = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 0.5),
        Point2::new(0.5, 0.5),
        Point2::new(0.5, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let d = SamplingDomain::polygon(outer, vec![]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut s: Vec<WeightedSite> = Vec::new();
    while s.len() < 12 {
        let p = Point2::new(rng.gen(), rng.gen());
        if d.contains(p) && s.iter().all(|q| q.center.dist(p) >= 0.12) {
            s.push(site(s.len() as u32, p.x, p.y, 0.08));
        }
    }
    let t = RegularTriangulation::build(&s, &d).unwrap();
    let ctx = GapContext::new(&d, 1e-14);
    let bg = clip_boundary_gaps(&t, &ctx).unwrap();
    assert!(!bg.is_empty());
    for _ in 0..20_000 {
        let q = Point2::new(rng.gen(), rng.gen());
        if !d.contains(q) || s.iter().any(|x| x.covers(q)) {
            continue;
        }
        // The owner cell is the site of minimal power.
        let owner = s.iter().min_by(|a, b| power_at(q, a.as_weighted()).total_cmp(&power_at(q, b.as_weighted()))).unwrap();
        let cell = t.power_cell(owner.id).unwrap();
        let reaches_boundary = ctx.segments.as_ref().unwrap().touches_convex(&cell) || cell.iter().any(|&c| !d.contains(c));
        if reaches_boundary {
            let g = bg.iter().find(|g| g.site == owner.id).expect("boundary gap reported for the owner cell");
            assert!(convex_contains(&g.support, q, 1e-12));
        }
    }
}

