//! The regular triangulation of a sample set viewed as a triangle mesh, with
//! quality statistics and text exports.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::SamplingDomain;
use crate::geom::{cross3, triangle_angles, Point2, SiteId};
use crate::triangulation::RegularTriangulation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh2 {
    pub vertices: Vec<Point2>,
    pub radii: Vec<f64>,
    pub sites: Vec<SiteId>,
    /// Counter-clockwise vertex index triples.
    pub triangles: Vec<[u32; 3]>,
    /// Lattice translation of each corner; all zero unless periodic.
    pub offsets: Vec<[(i8, i8); 3]>,
    pub boundary: Vec<bool>,
    pub periodic: bool,
}

type EdgeKey = (u32, u32, i8, i8);

fn edge_key(a: u32, oa: (i8, i8), b: u32, ob: (i8, i8)) -> EdgeKey {
    if a < b || (a == b && (ob.0, ob.1) > (oa.0, oa.1)) {
        (a, b, ob.0 - oa.0, ob.1 - oa.1)
    } else {
        (b, a, oa.0 - ob.0, oa.1 - ob.1)
    }
}

impl Mesh2 {
    /// Single-triangle or other explicit meshes on the plane.
    pub fn from_triangles(vertices: Vec<Point2>, triangles: Vec<[u32; 3]>) -> Self {
        let n = vertices.len();
        let mut m = Mesh2 {
            radii: vec![0.0; n],
            sites: (0..n as u32).map(SiteId).collect(),
            offsets: vec![[(0, 0); 3]; triangles.len()],
            boundary: vec![false; n],
            periodic: false,
            vertices,
            triangles,
        };
        m.flag_boundary();
        m
    }

    pub fn tri_points(&self, k: usize) -> [Point2; 3] {
        let t = self.triangles[k];
        let o = self.offsets[k];
        [0, 1, 2].map(|i| {
            let p = self.vertices[t[i] as usize];
            Point2::new(p.x + o[i].0 as f64, p.y + o[i].1 as f64)
        })
    }

    /// Undirected edges with the number of incident triangles.
    fn edge_map(&self) -> HashMap<EdgeKey, u32> {
        let mut e = HashMap::with_capacity(self.triangles.len() * 2);
        for (k, t) in self.triangles.iter().enumerate() {
            let o = self.offsets[k];
            for i in 0..3 {
                let j = (i + 1) % 3;
                *e.entry(edge_key(t[i], o[i], t[j], o[j])).or_insert(0) += 1;
            }
        }
        e
    }

    pub fn num_edges(&self) -> usize {
        self.edge_map().len()
    }

    /// Edges on one triangle only.
    pub fn boundary_edge_count(&self) -> usize {
        self.edge_map().values().filter(|&&c| c == 1).count()
    }

    fn flag_boundary(&mut self) {
        let mut b = vec![false; self.vertices.len()];
        for ((a, c, _, _), n) in self.edge_map() {
            if n == 1 {
                b[a as usize] = true;
                b[c as usize] = true;
            }
        }
        for (f, x) in self.boundary.iter_mut().zip(b) {
            *f |= x;
        }
    }

    /// Number of distinct edges at each vertex.
    pub fn valences(&self) -> Vec<usize> {
        let mut v = vec![0; self.vertices.len()];
        for (a, b, _, _) in self.edge_map().into_keys() {
            v[a as usize] += 1;
            v[b as usize] += 1;
        }
        v
    }

    /// Every edge has one or two triangles and every triangle is ccw.
    pub fn audit(&self) -> Result<(), String> {
        for (k, _) in self.triangles.iter().enumerate() {
            let [a, b, c] = self.tri_points(k);
            if cross3(a, b, c) <= 0.0 {
                return Err(format!("triangle {k} is not counter-clockwise"));
            }
        }
        if let Some((e, n)) = self.edge_map().into_iter().find(|&(_, n)| n > 2) {
            return Err(format!("edge {e:?} has {n} triangles"));
        }
        if self.periodic && self.boundary_edge_count() != 0 {
            return Err("periodic mesh has boundary edges".into());
        }
        Ok(())
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.num_edges() as i64 + self.triangles.len() as i64
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for p in &self.vertices {
            let _ = writeln!(s, "v {} {} 0", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} {}\n", self.vertices.len(), self.triangles.len(), self.num_edges());
        for p in &self.vertices {
            let _ = writeln!(s, "{} {} 0", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

/// The canonical triangles of `t` as a mesh. On bounded domains triangles
/// touching the frame or lying outside the domain are dropped and vertices
/// on the mesh boundary are flagged.
pub fn extract_mesh(t: &RegularTriangulation, domain: &SamplingDomain) -> Mesh2 {
    let sites: Vec<_> = t.sites().copied().collect();
    let mut index: HashMap<SiteId, u32> = HashMap::with_capacity(sites.len());
    for (k, s) in sites.iter().enumerate() {
        index.insert(s.id, k as u32);
    }
    let mut triangles = Vec::new();
    let mut offsets = Vec::new();
    for r in t.triangles() {
        let v = t.tri_vertices(r);
        if v.iter().any(|x| x.site.is_none()) {
            continue;
        }
        if !t.is_periodic() {
            let c = (v[0].pos + v[1].pos + v[2].pos) * (1.0 / 3.0);
            if !domain.contains(c) {
                continue;
            }
        }
        triangles.push(v.map(|x| index[&x.site.unwrap()]));
        offsets.push(v.map(|x| x.offset));
    }
    let n = sites.len();
    let mut m = Mesh2 {
        vertices: sites.iter().map(|s| s.center).collect(),
        radii: sites.iter().map(|s| s.radius()).collect(),
        sites: sites.iter().map(|s| s.id).collect(),
        triangles,
        offsets,
        boundary: vec![false; n],
        periodic: t.is_periodic(),
    };
    if !m.periodic {
        m.flag_boundary();
    }
    m
}

/// `6/√3 · |t| / (p · h)` with half-perimeter `p` and longest edge `h`;
/// 1 for equilateral triangles, 0 when degenerate.
pub fn triangle_quality(a: Point2, b: Point2, c: Point2) -> f64 {
    let area = 0.5 * cross3(a, b, c).abs();
    let (e0, e1, e2) = (a.dist(b), b.dist(c), c.dist(a));
    let p = 0.5 * (e0 + e1 + e2);
    let h = e0.max(e1).max(e2);
    if area == 0.0 || p == 0.0 {
        return 0.0;
    }
    6.0 / 3f64.sqrt() * area / (p * h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub q_min: f64,
    /// `|e|_min / r_min`.
    pub edge_ratio_min: f64,
    /// `|e|_max / (2 r_min)`.
    pub edge_ratio_max: f64,
    /// `|t|_min / (√3/4 r_min²)`.
    pub area_ratio_min: f64,
    /// `|t|_max / (3√3/4 r_min²)`.
    pub area_ratio_max: f64,
    /// Percent of triangles whose smallest angle is below 30°.
    pub pct_angles_below_30: f64,
    /// Interior vertex count per valence.
    pub valence: BTreeMap<usize, usize>,
    /// Percent of interior vertices with valence 5, 6 or 7.
    pub v567: f64,
}

impl MeshStats {
    /// Percent of interior vertices with the given valence.
    pub fn valence_pct(&self, v: usize) -> f64 {
        let total: usize = self.valence.values().sum();
        if total == 0 {
            return 0.0;
        }
        100.0 * *self.valence.get(&v).unwrap_or(&0) as f64 / total as f64
    }
}

pub fn mesh_stats(m: &Mesh2, r_min: f64) -> MeshStats {
    let mut s = MeshStats {
        vertices: m.vertices.len(),
        triangles: m.triangles.len(),
        theta_min: f64::INFINITY,
        theta_max: 0.0,
        q_min: f64::INFINITY,
        edge_ratio_min: f64::INFINITY,
        edge_ratio_max: 0.0,
        area_ratio_min: f64::INFINITY,
        area_ratio_max: 0.0,
        pct_angles_below_30: 0.0,
        valence: BTreeMap::new(),
        v567: 0.0,
    };
    let mut below = 0usize;
    let (mut e_min, mut e_max, mut a_min, mut a_max) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for k in 0..m.triangles.len() {
        let [a, b, c] = m.tri_points(k);
        let ang = triangle_angles(a, b, c);
        let lo = ang.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ang.iter().copied().fold(0.0, f64::max);
        s.theta_min = s.theta_min.min(lo);
        s.theta_max = s.theta_max.max(hi);
        if lo < 30.0 {
            below += 1;
        }
        s.q_min = s.q_min.min(triangle_quality(a, b, c));
        for (p, q) in [(a, b), (b, c), (c, a)] {
            let l = p.dist(q);
            e_min = e_min.min(l);
            e_max = e_max.max(l);
        }
        let ar = 0.5 * cross3(a, b, c).abs();
        a_min = a_min.min(ar);
        a_max = a_max.max(ar);
    }
    let s3 = 3f64.sqrt();
    s.edge_ratio_min = e_min / r_min;
    s.edge_ratio_max = e_max / (2.0 * r_min);
    s.area_ratio_min = a_min / (s3 / 4.0 * r_min * r_min);
    s.area_ratio_max = a_max / (3.0 * s3 / 4.0 * r_min * r_min);
    if !m.triangles.is_empty() {
        s.pct_angles_below_30 = 100.0 * below as f64 / m.triangles.len() as f64;
    }
    let val = m.valences();
    let mut interior = 0usize;
    let mut good = 0usize;
    for (k, &v) in val.iter().enumerate() {
        if m.boundary[k] || v == 0 {
            continue;
        }
        interior += 1;
        *s.valence.entry(v).or_insert(0) += 1;
        if (5..=7).contains(&v) {
            good += 1;
        }
    }
    if interior > 0 {
        s.v567 = 100.0 * good as f64 / interior as f64;
    }
    s
}

/// Header and one row per labelled result, in the column layout of the
/// classic 2D meshing statistics table.
pub fn stats_table(rows: &[(&str, &MeshStats)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "Result", "#v", "θmin", "θmax", "|e|min'", "|e|max'", "|t|min'", "|t|max'", "θ<30", "v567"
    );
    for (name, st) in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>8} {:>7.1} {:>7.1} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.2} {:>6.1}%",
            name,
            format_count(st.vertices),
            st.theta_min,
            st.theta_max,
            st.edge_ratio_min,
            st.edge_ratio_max,
            st.area_ratio_min,
            st.area_ratio_max,
            st.pct_angles_below_30,
            st.v567
        );
    }
    s
}

fn format_count(n: usize) -> String {
    if n >= 1000 {
        format!("{:.1}k", n as f64 / 1000.0)
    } else {
        n.to_string()
    }
}
