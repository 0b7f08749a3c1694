use std::cmp::Ordering;

use crate::geom::{Point2, SiteId};
use crate::predicates::{orient2d, power_test};

use super::{RegularTriangulation, TriangulationError, NONE};

impl RegularTriangulation {
    fn conflicts(&self, t: u32, p: (Point2, f64)) -> bool {
        let v = self.tris[t as usize].v;
        power_test(self.wp(v[0]), self.wp(v[1]), self.wp(v[2]), p) == Ordering::Greater
    }

    /// Bowyer–Watson insertion of a single vertex. Nothing is modified when an
    /// error is returned.
    pub(crate) fn insert_vertex(
        &mut self,
        p: Point2,
        w: f64,
        site: u32,
        offset: (i8, i8),
        start: u32,
    ) -> Result<u32, TriangulationError> {
        let t0 = self.walk(p, start);
        if t0 == NONE {
            return Err(TriangulationError::OutsideDomain(p));
        }
        if !self.conflicts(t0, (p, w)) {
            return Err(TriangulationError::RedundantSite(SiteId(site)));
        }

        let mark = self.next_mark();
        let mut cavity = vec![t0];
        self.mark[t0 as usize] = mark;
        let mut stack = vec![t0];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let u = self.tris[t as usize].n[i];
                if u == NONE || self.mark[u as usize] == mark {
                    continue;
                }
                if self.conflicts(u, (p, w)) {
                    self.mark[u as usize] = mark;
                    cavity.push(u);
                    stack.push(u);
                }
            }
        }

        // Boundary edges (a, b, outer); enlarge until every edge sees p.
        let boundary = loop {
            let mut edges: Vec<(u32, u32, u32)> = Vec::with_capacity(cavity.len() + 2);
            let mut grow = None;
            for &t in &cavity {
                let tri = &self.tris[t as usize];
                for i in 0..3 {
                    let u = tri.n[i];
                    if u != NONE && self.mark[u as usize] == mark {
                        continue;
                    }
                    let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                    let pa = self.verts[a as usize].pos;
                    let pb = self.verts[b as usize].pos;
                    if orient2d(pa, pb, p) != Ordering::Greater {
                        if u == NONE {
                            return Err(TriangulationError::OutsideDomain(p));
                        }
                        grow = Some(u);
                        break;
                    }
                    edges.push((a, b, u));
                }
                if grow.is_some() {
                    break;
                }
            }
            match grow {
                Some(u) => {
                    self.mark[u as usize] = mark;
                    cavity.push(u);
                }
                None => break edges,
            }
        };

        // Every cavity vertex must stay on the boundary, otherwise an existing
        // site would disappear.
        let mut on_boundary: Vec<u32> = boundary.iter().map(|e| e.0).collect();
        on_boundary.sort_unstable();
        for &t in &cavity {
            for &v in &self.tris[t as usize].v {
                if on_boundary.binary_search(&v).is_err() {
                    let s = self.verts[v as usize].site;
                    return Err(TriangulationError::RedundantSite(SiteId(s)));
                }
            }
        }

        let nv = self.alloc_vertex(p, w, site, offset);
        let mut created: Vec<(u32, u32, u32)> = Vec::with_capacity(boundary.len());
        for &(a, b, outer) in &boundary {
            let t = self.new_tri([nv, a, b]);
            self.tris[t as usize].n[0] = outer;
            if outer != NONE {
                self.link(outer, b, a, t);
            }
            created.push((a, b, t));
        }
        // Around the new vertex: triangle (nv, a, b) neighbors the one
        // starting at b across (nv, b) and the one ending at a across (a, nv).
        for k in 0..created.len() {
            let (a, b, t) = created[k];
            let next = created.iter().find(|c| c.0 == b).expect("closed cavity boundary").2;
            let prev = created.iter().find(|c| c.1 == a).expect("closed cavity boundary").2;
            self.tris[t as usize].n[1] = next;
            self.tris[t as usize].n[2] = prev;
            self.verts[a as usize].tri = t;
        }
        self.verts[nv as usize].tri = created[0].2;
        for &t in &cavity {
            self.kill_tri(t);
        }
        self.last = created[0].2;
        Ok(nv)
    }
}
