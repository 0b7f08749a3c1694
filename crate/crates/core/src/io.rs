//! Text and image formats: points files, polygon files, PGM density maps.
//!
//! Points files hold one `x y r` line per sample after any number of `#`
//! header lines. Numbers are written in shortest round-trip form, so a file
//! written here survives load and save byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

use crate::density::{DensityError, DensityField};
use crate::domain::{DomainError, SamplingDomain};
use crate::geom::{Point2, WeightedSite};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("PGM: {0}")]
    Pgm(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointsFile {
    /// Header lines without the leading `#`.
    pub header: Vec<String>,
    pub points: Vec<(Point2, f64)>,
}

impl PointsFile {
    pub fn from_sites(header: Vec<String>, sites: &[WeightedSite]) -> Self {
        PointsFile { header, points: sites.iter().map(|s| (s.center, s.radius())).collect() }
    }

    pub fn parse(src: &str) -> Result<Self, IoError> {
        let mut out = PointsFile::default();
        for (k, line) in src.lines().enumerate() {
            if let Some(h) = line.strip_prefix('#') {
                out.header.push(h.to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let v = parse_numbers(line, k + 1)?;
            if v.len() != 3 {
                return Err(IoError::Parse { line: k + 1, msg: format!("expected `x y r`, got {} numbers", v.len()) });
            }
            if !(v[2] > 0.0) {
                return Err(IoError::Parse { line: k + 1, msg: format!("radius must be positive, got {}", v[2]) });
            }
            out.points.push((Point2::new(v[0], v[1]), v[2]));
        }
        Ok(out)
    }

    /// Header value for `key` from a `# key: value` line.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find_map(|h| h.trim().strip_prefix(key)?.strip_prefix(':').map(str::trim))
    }

    pub fn sites(&self) -> Vec<WeightedSite> {
        self.points.iter().enumerate().map(|(i, &(p, r))| WeightedSite::new(crate::SiteId(i as u32), p, r)).collect()
    }
}

impl std::fmt::Display for PointsFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for h in &self.header {
            writeln!(f, "#{h}")?;
        }
        for (p, r) in &self.points {
            writeln!(f, "{} {} {}", p.x, p.y, r)?;
        }
        Ok(())
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<f64>, IoError> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IoError::Parse { line: lineno, msg: format!("not a finite number: {t:?}") })
        })
        .collect()
}

/// Polygon file: one ring per line as `x0 y0 x1 y1 …`; the first ring is
/// the outer boundary, the rest are holes. `#` lines are comments.
pub fn parse_polygon(src: &str) -> Result<SamplingDomain, IoError> {
    let mut rings = Vec::new();
    for (k, line) in src.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v = parse_numbers(line, k + 1)?;
        if v.len() % 2 != 0 {
            return Err(IoError::Parse { line: k + 1, msg: "odd number of coordinates".into() });
        }
        rings.push(v.chunks(2).map(|c| Point2::new(c[0], c[1])).collect::<Vec<_>>());
    }
    if rings.is_empty() {
        return Err(IoError::Parse { line: 0, msg: "no rings".into() });
    }
    let outer = rings.remove(0);
    Ok(SamplingDomain::polygon(outer, rings)?)
}

pub fn polygon_to_string(domain: &SamplingDomain) -> String {
    let mut s = String::new();
    for ring in domain.rings() {
        let line: Vec<String> = ring.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

/// Decoded grayscale image, row 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl Pgm {
    pub fn parse(bytes: &[u8]) -> Result<Self, IoError> {
        let mut pos = 0;
        let magic = token(bytes, &mut pos)?;
        let binary = match magic.as_str() {
            "P2" => false,
            "P5" => true,
            m => return Err(IoError::Pgm(format!("unsupported magic {m:?}"))),
        };
        let width: usize = number(bytes, &mut pos)?;
        let height: usize = number(bytes, &mut pos)?;
        let maxval: u16 = number(bytes, &mut pos)?;
        if width == 0 || height == 0 || maxval == 0 {
            return Err(IoError::Pgm("zero dimension or maxval".into()));
        }
        let n = width * height;
        let pixels = if binary {
            // Exactly one whitespace byte separates the header from the raster.
            pos += 1;
            let wide = maxval > 255;
            let need = n * if wide { 2 } else { 1 };
            let data = bytes.get(pos..pos + need).ok_or_else(|| IoError::Pgm("raster truncated".into()))?;
            if wide {
                data.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
            } else {
                data.iter().map(|&b| b as u16).collect()
            }
        } else {
            (0..n).map(|_| number::<u16>(bytes, &mut pos)).collect::<Result<Vec<_>, _>>()?
        };
        if pixels.iter().any(|&p| p > maxval) {
            return Err(IoError::Pgm("pixel above maxval".into()));
        }
        Ok(Pgm { width, height, maxval, pixels })
    }

    /// Density with black → `rho_lo` and white → `rho_hi`, spanning the box
    /// `[lo, hi]` with the top image row at `hi.y`.
    pub fn to_density(&self, rho_lo: f64, rho_hi: f64, lo: Point2, hi: Point2) -> Result<DensityField, IoError> {
        let mut values = Vec::with_capacity(self.pixels.len());
        for j in (0..self.height).rev() {
            for i in 0..self.width {
                let t = self.pixels[j * self.width + i] as f64 / self.maxval as f64;
                values.push(rho_lo + (rho_hi - rho_lo) * t);
            }
        }
        Ok(DensityField::grid(self.width, self.height, values, lo, hi)?)
    }
}

fn token(bytes: &[u8], pos: &mut usize) -> Result<String, IoError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(IoError::Pgm("unexpected end of file".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn number<T: std::str::FromStr>(bytes: &[u8], pos: &mut usize) -> Result<T, IoError> {
    let t = token(bytes, pos)?;
    t.parse().map_err(|_| IoError::Pgm(format!("bad number {t:?}")))
}
