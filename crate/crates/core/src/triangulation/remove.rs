use std::cmp::Ordering;

use crate::geom::{power_center_unchecked, power_at, WeightedPoint};
use crate::predicates::{orient2d, power_test};

use super::{RegularTriangulation, NONE};

impl RegularTriangulation {
    /// Removes a vertex and fills its star by ear clipping the link polygon.
    /// The next ear is the one whose lifted plane passes lowest below the
    /// removed vertex, which is a face of the new lower hull; a flip pass
    /// repairs any residue of rounding in that choice.
    pub(crate) fn remove_vertex(&mut self, v: u32) {
        let star = self.star(v);
        let mut poly: Vec<u32> = Vec::with_capacity(star.len());
        let mut outer: Vec<u32> = Vec::with_capacity(star.len());
        for &t in &star {
            let i = self.index_in(t, v);
            let tri = &self.tris[t as usize];
            poly.push(tri.v[(i + 1) % 3]);
            outer.push(tri.n[i]);
        }
        let vp = WeightedPoint::new(self.verts[v as usize].pos, self.verts[v as usize].weight);
        let mut created = Vec::with_capacity(poly.len());

        while poly.len() > 3 {
            let n = poly.len();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let (a, b, c) = (poly[(j + n - 1) % n], poly[j], poly[(j + 1) % n]);
                let (pa, pb, pc) = (self.verts[a as usize].pos, self.verts[b as usize].pos, self.verts[c as usize].pos);
                if orient2d(pa, pb, pc) != Ordering::Greater {
                    continue;
                }
                let blocked = poly.iter().any(|&q| {
                    if q == a || q == b || q == c {
                        return false;
                    }
                    let pq = self.verts[q as usize].pos;
                    orient2d(pa, pb, pq) != Ordering::Less
                        && orient2d(pb, pc, pq) != Ordering::Less
                        && orient2d(pc, pa, pq) != Ordering::Less
                });
                if blocked {
                    continue;
                }
                let wa = WeightedPoint::new(pa, self.verts[a as usize].weight);
                let center = power_center_unchecked(
                    wa,
                    WeightedPoint::new(pb, self.verts[b as usize].weight),
                    WeightedPoint::new(pc, self.verts[c as usize].weight),
                );
                let pi = power_at(center, vp) - power_at(center, wa);
                if best.is_none_or(|(_, bp)| pi > bp) {
                    best = Some((j, pi));
                }
            }
            let j = best.expect("a star-shaped link polygon always has an ear").0;
            let n = poly.len();
            let jp = (j + n - 1) % n;
            let jn = (j + 1) % n;
            let (a, b, c) = (poly[jp], poly[j], poly[jn]);
            let t = self.new_tri([a, b, c]);
            self.tris[t as usize].n[0] = outer[j];
            self.tris[t as usize].n[2] = outer[jp];
            self.link(outer[j], c, b, t);
            self.link(outer[jp], b, a, t);
            created.push(t);
            outer[jp] = t;
            poly.remove(j);
            outer.remove(j);
        }
        let t = self.new_tri([poly[0], poly[1], poly[2]]);
        self.tris[t as usize].n = [outer[1], outer[2], outer[0]];
        self.link(outer[1], poly[2], poly[1], t);
        self.link(outer[2], poly[0], poly[2], t);
        self.link(outer[0], poly[1], poly[0], t);
        created.push(t);

        for &t in &created {
            for k in 0..3 {
                let u = self.tris[t as usize].v[k];
                self.verts[u as usize].tri = t;
            }
        }
        for &t in &star {
            self.kill_tri(t);
        }
        self.verts[v as usize].alive = false;
        self.free_verts.push(v);
        self.last = created[0];
        self.legalize(created);
    }

    /// Lawson flips until every edge around the given triangles is regular.
    pub(crate) fn legalize(&mut self, mut stack: Vec<u32>) {
        let mut guard = 0usize;
        while let Some(t) = stack.pop() {
            if !self.tris[t as usize].alive {
                continue;
            }
            guard += 1;
            if guard > 100_000 {
                log::warn!("flip repair did not settle");
                return;
            }
            for i in 0..3 {
                let u = self.tris[t as usize].n[i];
                if u == NONE {
                    continue;
                }
                let tv = self.tris[t as usize].v;
                let (a, b, c) = (tv[i], tv[(i + 1) % 3], tv[(i + 2) % 3]);
                let s = (0..3).find(|&s| self.tris[u as usize].n[s] == t).expect("symmetric neighbors");
                let q = self.tris[u as usize].v[s];
                if power_test(self.wp(tv[0]), self.wp(tv[1]), self.wp(tv[2]), self.wp(q)) != Ordering::Greater {
                    continue;
                }
                let (pa, pb, pc, pq) = (
                    self.verts[a as usize].pos,
                    self.verts[b as usize].pos,
                    self.verts[c as usize].pos,
                    self.verts[q as usize].pos,
                );
                if orient2d(pa, pb, pq) != Ordering::Greater || orient2d(pa, pq, pc) != Ordering::Greater {
                    continue;
                }
                // Outer neighbors of the quad a-b-q-c.
                let n_ab = self.tris[t as usize].n[(i + 2) % 3];
                let n_ca = self.tris[t as usize].n[(i + 1) % 3];
                let ut = &self.tris[u as usize];
                let n_bq = (0..3).find(|&k| ut.v[(k + 1) % 3] == b && ut.v[(k + 2) % 3] == q).map(|k| ut.n[k]).unwrap();
                let n_qc = (0..3).find(|&k| ut.v[(k + 1) % 3] == q && ut.v[(k + 2) % 3] == c).map(|k| ut.n[k]).unwrap();
                let t1 = self.new_tri([a, b, q]);
                let t2 = self.new_tri([a, q, c]);
                self.tris[t1 as usize].n = [n_bq, t2, n_ab];
                self.tris[t2 as usize].n = [n_qc, n_ca, t1];
                self.link(n_bq, q, b, t1);
                self.link(n_ab, b, a, t1);
                self.link(n_qc, c, q, t2);
                self.link(n_ca, a, c, t2);
                self.verts[a as usize].tri = t1;
                self.verts[b as usize].tri = t1;
                self.verts[q as usize].tri = t2;
                self.verts[c as usize].tri = t2;
                self.kill_tri(t);
                self.kill_tri(u);
                self.last = t1;
                stack.push(t1);
                stack.push(t2);
                break;
            }
        }
    }
}
