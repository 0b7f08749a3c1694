//! Uniform background grid for conflict queries during sampling.

use crate::domain::SamplingDomain;
use crate::geom::{Point2, SiteId};

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    site: u32,
    next: u32,
}

#[derive(Clone, Copy, Debug)]
struct Disk {
    center: Point2,
    radius: f64,
    alive: bool,
}

/// Grid with cells of side at most `r_min/√2`, so one cell fits inside any
/// disk of radius `r_min`. Each cell stores the id of a disk covering it
/// completely (if any), the disks overlapping it and the centers inside it.
/// Lists are intrusive singly linked lists over a shared node pool.
#[derive(Clone, Debug)]
pub struct AccelGrid {
    periodic: bool,
    lo: Point2,
    h: f64,
    nx: usize,
    ny: usize,
    covered: Vec<u32>,
    overlap_head: Vec<u32>,
    center_head: Vec<u32>,
    nodes: Vec<Node>,
    free_nodes: Vec<u32>,
    disks: Vec<Disk>,
    max_radius: f64,
}

impl AccelGrid {
    pub fn new(domain: &SamplingDomain, r_min: f64) -> Self {
        let target = r_min / std::f64::consts::SQRT_2;
        let (lo, hi) = domain.bbox();
        let (nx, ny, h) = if domain.is_periodic() {
            let n = (1.0 / target).ceil().max(1.0) as usize;
            (n, n, 1.0 / n as f64)
        } else {
            let nx = ((hi.x - lo.x) / target).ceil().max(1.0) as usize;
            let ny = ((hi.y - lo.y) / target).ceil().max(1.0) as usize;
            (nx, ny, target)
        };
        let cells = nx * ny;
        AccelGrid {
            periodic: domain.is_periodic(),
            lo,
            h,
            nx,
            ny,
            covered: vec![NIL; cells],
            overlap_head: vec![NIL; cells],
            center_head: vec![NIL; cells],
            nodes: Vec::new(),
            free_nodes: Vec::new(),
            disks: Vec::new(),
            max_radius: 0.0,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.disks.iter().filter(|d| d.alive).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unwrapped integer cell coordinates of a point.
    fn raw_cell(&self, p: Point2) -> (i64, i64) {
        (((p.x - self.lo.x) / self.h).floor() as i64, ((p.y - self.lo.y) / self.h).floor() as i64)
    }

    /// Flat index of unwrapped cell coordinates, `None` outside a bounded grid.
    fn flat(&self, i: i64, j: i64) -> Option<usize> {
        if self.periodic {
            let i = i.rem_euclid(self.nx as i64) as usize;
            let j = j.rem_euclid(self.ny as i64) as usize;
            Some(j * self.nx + i)
        } else if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            None
        } else {
            Some(j as usize * self.nx + i as usize)
        }
    }

    fn clamp_cell(&self, c: (i64, i64)) -> (i64, i64) {
        if self.periodic {
            c
        } else {
            (c.0.clamp(0, self.nx as i64 - 1), c.1.clamp(0, self.ny as i64 - 1))
        }
    }

    fn push(&mut self, head: HeadKind, cell: usize, site: u32) {
        let node = Node { site, next: self.head(head)[cell] };
        let idx = match self.free_nodes.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        self.head_mut(head)[cell] = idx;
    }

    fn unlink(&mut self, head: HeadKind, cell: usize, site: u32) {
        let mut prev = NIL;
        let mut cur = self.head(head)[cell];
        while cur != NIL {
            let n = self.nodes[cur as usize];
            if n.site == site {
                if prev == NIL {
                    self.head_mut(head)[cell] = n.next;
                } else {
                    self.nodes[prev as usize].next = n.next;
                }
                self.free_nodes.push(cur);
                return;
            }
            prev = cur;
            cur = n.next;
        }
    }

    fn head(&self, k: HeadKind) -> &Vec<u32> {
        match k {
            HeadKind::Overlap => &self.overlap_head,
            HeadKind::Center => &self.center_head,
        }
    }

    fn head_mut(&mut self, k: HeadKind) -> &mut Vec<u32> {
        match k {
            HeadKind::Overlap => &mut self.overlap_head,
            HeadKind::Center => &mut self.center_head,
        }
    }

    fn iter_list(&self, head: u32) -> ListIter<'_> {
        ListIter { nodes: &self.nodes, cur: head }
    }

    /// Offset that brings a stored center next to `p` under periodicity.
    fn image(&self, p: Point2, c: Point2) -> Point2 {
        if self.periodic {
            let d = c - p;
            p + Point2::new(d.x - d.x.round(), d.y - d.y.round())
        } else {
            c
        }
    }

    /// Visits every unwrapped cell whose square meets the disk bounding box.
    fn cells_around(&self, p: Point2, r: f64) -> impl Iterator<Item = (i64, i64)> {
        let (i0, j0) = self.clamp_cell(self.raw_cell(Point2::new(p.x - r, p.y - r)));
        let (i1, j1) = self.clamp_cell(self.raw_cell(Point2::new(p.x + r, p.y + r)));
        // A periodic query never needs more than one full turn.
        let (i1, j1) = if self.periodic {
            (i1.min(i0 + self.nx as i64 - 1), j1.min(j0 + self.ny as i64 - 1))
        } else {
            (i1, j1)
        };
        (j0..=j1).flat_map(move |j| (i0..=i1).map(move |i| (i, j)))
    }

    fn cell_rect(&self, i: i64, j: i64) -> (Point2, Point2) {
        let a = Point2::new(self.lo.x + i as f64 * self.h, self.lo.y + j as f64 * self.h);
        (a, Point2::new(a.x + self.h, a.y + self.h))
    }

    /// Adds a disk. The id must be fresh.
    pub fn insert(&mut self, id: SiteId, center: Point2, radius: f64) {
        let k = id.0 as usize;
        if self.disks.len() <= k {
            self.disks.resize(k + 1, Disk { center: Point2::new(0.0, 0.0), radius: 0.0, alive: false });
        }
        self.disks[k] = Disk { center, radius, alive: true };
        self.max_radius = self.max_radius.max(radius);
        let (ci, cj) = self.raw_cell(center);
        let cc = self.flat(ci, cj).or_else(|| self.flat(self.clamp_cell((ci, cj)).0, self.clamp_cell((ci, cj)).1));
        if let Some(c) = cc {
            self.push(HeadKind::Center, c, id.0);
        }
        let r2 = radius * radius;
        let inner = r2 * (1.0 - 1e-12);
        let cells: Vec<(i64, i64)> = self.cells_around(center, radius).collect();
        for (i, j) in cells {
            let Some(c) = self.flat(i, j) else { continue };
            let (a, b) = self.cell_rect(i, j);
            let nearest = Point2::new(center.x.clamp(a.x, b.x), center.y.clamp(a.y, b.y));
            if nearest.dist2(center) >= r2 {
                continue;
            }
            self.push(HeadKind::Overlap, c, id.0);
            if self.covered[c] == NIL {
                let far = Point2::new(
                    if center.x - a.x > b.x - center.x { a.x } else { b.x },
                    if center.y - a.y > b.y - center.y { a.y } else { b.y },
                );
                if far.dist2(center) < inner {
                    self.covered[c] = id.0;
                }
            }
        }
    }

    pub fn remove(&mut self, id: SiteId) {
        let Some(d) = self.disks.get(id.0 as usize).copied().filter(|d| d.alive) else { return };
        self.disks[id.0 as usize].alive = false;
        let (ci, cj) = self.raw_cell(d.center);
        let cc = self.clamp_cell((ci, cj));
        if let Some(c) = self.flat(cc.0, cc.1) {
            self.unlink(HeadKind::Center, c, id.0);
        }
        let cells: Vec<(i64, i64)> = self.cells_around(d.center, d.radius).collect();
        for (i, j) in cells {
            let Some(c) = self.flat(i, j) else { continue };
            self.unlink(HeadKind::Overlap, c, id.0);
            if self.covered[c] == id.0 {
                self.covered[c] = NIL;
                let (a, b) = self.cell_rect(i, j);
                let replacement = self.iter_list(self.overlap_head[c]).find(|&s| {
                    let e = self.disks[s as usize];
                    let ctr = self.image(Point2::new((a.x + b.x) * 0.5, (a.y + b.y) * 0.5), e.center);
                    let inner = e.radius * e.radius * (1.0 - 1e-12);
                    [a, Point2::new(b.x, a.y), b, Point2::new(a.x, b.y)].iter().all(|q| q.dist2(ctr) < inner)
                });
                if let Some(s) = replacement {
                    self.covered[c] = s;
                }
            }
        }
    }

    /// Some disk strictly containing `p`, if any.
    pub fn covering(&self, p: Point2) -> Option<SiteId> {
        let (i, j) = self.raw_cell(p);
        let c = self.flat(i, j)?;
        if self.covered[c] != NIL {
            return Some(SiteId(self.covered[c]));
        }
        self.iter_list(self.overlap_head[c])
            .find(|&s| {
                let d = self.disks[s as usize];
                self.image(p, d.center).dist2(p) < d.radius * d.radius
            })
            .map(SiteId)
    }

    pub fn is_covered(&self, p: Point2) -> bool {
        self.covering(p).is_some()
    }

    /// Whether the cell of `p` is flagged as fully covered.
    pub fn cell_covered(&self, p: Point2) -> bool {
        let (i, j) = self.raw_cell(p);
        self.flat(i, j).is_some_and(|c| self.covered[c] != NIL)
    }

    /// Centers strictly within distance `r` of `p`, with their squared distance.
    pub fn centers_within(&self, p: Point2, r: f64) -> Vec<(SiteId, f64)> {
        let mut out = Vec::new();
        let r2 = r * r;
        let mut seen_cells = Vec::new();
        for (i, j) in self.cells_around(p, r) {
            let Some(c) = self.flat(i, j) else { continue };
            if self.periodic {
                if seen_cells.contains(&c) {
                    continue;
                }
                seen_cells.push(c);
            }
            for s in self.iter_list(self.center_head[c]) {
                let d = self.disks[s as usize];
                let d2 = self.image(p, d.center).dist2(p);
                if d2 < r2 {
                    out.push((SiteId(s), d2));
                }
            }
        }
        out
    }

    /// Distance to the nearest center within `r` of `p`, or `None`.
    pub fn nearest_center_within(&self, p: Point2, r: f64) -> Option<(SiteId, f64)> {
        self.centers_within(p, r)
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(s, d2)| (s, d2.sqrt()))
    }

    /// True when a disk `(p, r)` obeys the separation rule against every
    /// stored disk: `p` is not inside any disk and no center is inside the
    /// new disk.
    pub fn accepts(&self, p: Point2, r: f64) -> bool {
        !self.is_covered(p) && self.centers_within(p, r).is_empty()
    }

    pub fn disk(&self, id: SiteId) -> Option<(Point2, f64)> {
        self.disks.get(id.0 as usize).filter(|d| d.alive).map(|d| (d.center, d.radius))
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    /// Ids of covered cells and their recorded disk, for audits.
    pub fn covered_cells(&self) -> Vec<((Point2, Point2), SiteId)> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = j * self.nx + i;
                if self.covered[c] != NIL {
                    out.push((self.cell_rect(i as i64, j as i64), SiteId(self.covered[c])));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy)]
enum HeadKind {
    Overlap,
    Center,
}

struct ListIter<'a> {
    nodes: &'a [Node],
    cur: u32,
}

impl Iterator for ListIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.cur == NIL {
            return None;
        }
        let n = self.nodes[self.cur as usize];
        self.cur = n.next;
        Some(n.site)
    }
}
