//! SVG rendering of sample sets, gaps and meshes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::SamplingDomain;
use crate::gap::{extract_all_primitives, GapContext, GapError};
use crate::geom::Point2;
use crate::mesh::extract_mesh;
use crate::triangulation::RegularTriangulation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvgOptions {
    /// Width of the image in pixels; height follows the domain aspect.
    pub size: f64,
    pub disks: bool,
    pub centers: bool,
    pub gaps: bool,
    pub mesh: bool,
    pub valence: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { size: 800.0, disks: true, centers: true, gaps: true, mesh: false, valence: false }
    }
}

pub fn valence_color(v: usize) -> Option<&'static str> {
    match v {
        0..=4 => Some("#1b2a80"),
        5 => Some("#4a90d9"),
        6 => None,
        7 => Some("#f28e2b"),
        _ => Some("#2a7d2e"),
    }
}

struct View {
    lo: Point2,
    scale: f64,
    h: f64,
    periodic: bool,
}

impl View {
    fn x(&self, p: Point2) -> f64 {
        (p.x - self.lo.x) * self.scale
    }
    fn y(&self, p: Point2) -> f64 {
        self.h - (p.y - self.lo.y) * self.scale
    }
    /// Offsets at which a shape with bbox `[a, b]` shows in the unit tile.
    fn copies(&self, a: Point2, b: Point2) -> Vec<Point2> {
        if !self.periodic {
            return vec![Point2::new(0.0, 0.0)];
        }
        let mut out = Vec::new();
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (dx, dy) = (dx as f64, dy as f64);
                if a.x + dx < 1.0 && b.x + dx > 0.0 && a.y + dy < 1.0 && b.y + dy > 0.0 {
                    out.push(Point2::new(dx, dy));
                }
            }
        }
        out
    }
    fn poly(&self, pts: &[Point2], shift: Point2) -> String {
        pts.iter().map(|p| format!("{:.2},{:.2}", self.x(*p + shift), self.y(*p + shift))).collect::<Vec<_>>().join(" ")
    }
}

fn bbox(pts: &[Point2]) -> (Point2, Point2) {
    let mut a = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut b = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        a = Point2::new(a.x.min(p.x), a.y.min(p.y));
        b = Point2::new(b.x.max(p.x), b.y.max(p.y));
    }
    (a, b)
}

pub fn render(t: &RegularTriangulation, ctx: &GapContext, opts: &SvgOptions) -> Result<String, GapError> {
    let domain = &ctx.domain;
    let (lo, hi) = domain.bbox();
    let scale = opts.size / (hi.x - lo.x);
    let (w, h) = (opts.size, (hi.y - lo.y) * scale);
    let v = View { lo, scale, h, periodic: domain.is_periodic() };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#);
    let _ = writeln!(s, r#"<defs><clipPath id="view"><rect x="0" y="0" width="{w:.2}" height="{h:.2}"/></clipPath></defs>"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g clip-path="url(#view)">"#);

    if let SamplingDomain::Box { .. } | SamplingDomain::PolygonWithHoles { .. } = domain {
        let mut d = String::new();
        for ring in domain.rings() {
            let _ = write!(d, "M{}Z ", v.poly(&ring, Point2::default()).replace(' ', " L"));
        }
        let _ = writeln!(s, r##"<path d="{}" fill="#f4f4f4" fill-rule="evenodd" stroke="black" stroke-width="1"/>"##, d.trim_end());
    }

    let sites: Vec<_> = t.sites().collect();
    if opts.disks {
        let _ = writeln!(s, r##"<g fill="#9ecae1" fill-opacity="0.35" stroke="#3182bd" stroke-width="0.5">"##);
        for site in sites.iter() {
            let r = site.radius();
            let c = site.center;
            for off in v.copies(c - Point2::new(r, r), c + Point2::new(r, r)) {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}"/>"#, v.x(c + off), v.y(c + off), r * scale);
            }
        }
        let _ = writeln!(s, "</g>");
    }

    if opts.gaps {
        let (prims, _) = extract_all_primitives(t, ctx)?;
        let _ = writeln!(s, r##"<g fill="#e31a1c" fill-opacity="0.8" stroke="#a50f15" stroke-width="0.5">"##);
        for p in &prims {
            let (a, b) = bbox(&p.vertices);
            for off in v.copies(a, b) {
                let _ = writeln!(s, r#"<polygon points="{}"/>"#, v.poly(&p.vertices, off));
            }
        }
        let _ = writeln!(s, "</g>");
    }

    if opts.mesh || opts.valence {
        let m = extract_mesh(t, domain);
        if opts.valence {
            let val = m.valences();
            let _ = writeln!(s, r#"<g stroke="none">"#);
            for (k, p) in m.vertices.iter().enumerate() {
                let Some(col) = valence_color(val[k]) else { continue };
                if m.boundary[k] {
                    continue;
                }
                let r = m.radii[k] * 0.5;
                for off in v.copies(*p - Point2::new(r, r), *p + Point2::new(r, r)) {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{col}"/>"#, v.x(*p + off), v.y(*p + off), r * scale);
                }
            }
            let _ = writeln!(s, "</g>");
        }
        if opts.mesh {
            let _ = writeln!(s, r##"<g fill="none" stroke="#333" stroke-width="0.4">"##);
            for k in 0..m.triangles.len() {
                let pts = m.tri_points(k);
                let (a, b) = bbox(&pts);
                for off in v.copies(a, b) {
                    let _ = writeln!(s, r#"<polygon points="{}"/>"#, v.poly(&pts, off));
                }
            }
            let _ = writeln!(s, "</g>");
        }
    }

    if opts.centers {
        let _ = writeln!(s, r#"<g fill="black">"#);
        for site in sites.iter() {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}"/>"#, v.x(site.center), v.y(site.center), (site.radius() * scale * 0.08).max(0.5));
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}
