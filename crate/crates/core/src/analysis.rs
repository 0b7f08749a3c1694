//! Point-set spectra and run statistics.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt::{Debug, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gap::{analyze, connected_components, detect_gaps, GapContext, GapError};
use crate::geom::Point2;
use crate::mesh::{stats_table, MeshStats};
use crate::triangulation::RegularTriangulation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("TooFewPoints: {0} points, need at least {min}", min = MIN_POINTS)]
    TooFewPoints(usize),
    #[error("InvalidGrid: {0} is not a power of two in [256, 1024]")]
    InvalidGrid(usize),
    #[error("TooFewRuns: {0}")]
    TooFewRuns(usize),
    #[error("ConfigMismatch: run {index} has {found}, expected {expected}")]
    ConfigMismatch { index: usize, expected: String, found: String },
    #[error("spectra to average differ in grid size")]
    GridMismatch,
    #[error(transparent)]
    Gap(#[from] GapError),
}

pub const MIN_POINTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: usize,
    /// Radial frequency of each bin, in cycles per unit length.
    pub frequencies: Vec<f64>,
    pub radial_power: Vec<f64>,
    /// `10·log10(variance / mean²)` of the periodogram over each annulus.
    pub anisotropy: Vec<f64>,
    /// Row-major `grid × grid` periodogram; entry `(i, j)` is frequency
    /// `(i - grid/2, j - grid/2)`.
    pub raw: Vec<f64>,
}

impl Spectrum {
    pub fn power_at(&self, kx: i64, ky: i64) -> f64 {
        let h = (self.grid / 2) as i64;
        self.raw[((ky + h) as usize) * self.grid + (kx + h) as usize]
    }

    /// Mean of `radial_power` over the bins in `[lo, hi)` fractions of the bin range.
    pub fn band_mean(&self, lo: f64, hi: f64) -> f64 {
        let n = self.radial_power.len();
        let a = (lo * n as f64).floor() as usize;
        let b = ((hi * n as f64).ceil() as usize).clamp(a + 1, n);
        self.radial_power[a..b].iter().sum::<f64>() / (b - a) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("frequency,power,anisotropy_db\n");
        for i in 0..self.frequencies.len() {
            let _ = writeln!(s, "{},{},{}", self.frequencies[i], self.radial_power[i], self.anisotropy[i]);
        }
        s
    }
}

/// Periodogram `P(f) = |Σ exp(−2πi f·x)|² / N` of points on the unit torus,
/// radially averaged over integer frequencies `|fx|, |fy| < grid/2` with
/// `|f|` rounding to `1..=grid/2`. The DC term is excluded.
pub fn periodogram(points: &[Point2], grid: usize) -> Result<Spectrum, AnalysisError> {
    if points.len() < MIN_POINTS {
        return Err(AnalysisError::TooFewPoints(points.len()));
    }
    if !(256..=1024).contains(&grid) || !grid.is_power_of_two() {
        return Err(AnalysisError::InvalidGrid(grid));
    }
    Ok(spectrum_unchecked(points, grid))
}

pub(crate) fn spectrum_unchecked(points: &[Point2], grid: usize) -> Spectrum {
    let raw = raw_periodogram(points, grid);
    radial(grid, raw)
}

fn raw_row(points: &[Point2], grid: usize, ky: i64) -> Vec<f64> {
    let h = (grid / 2) as i64;
    let mut re = vec![0.0; grid];
    let mut im = vec![0.0; grid];
    for p in points {
        // exp(−2πi (kx x + ky y)) for kx = −h, −h+1, … by repeated rotation.
        let (s0, c0) = (-TAU * (p.y * ky as f64 - p.x * h as f64)).sin_cos();
        let (ss, cs) = (-TAU * p.x).sin_cos();
        let (mut c, mut s) = (c0, s0);
        for i in 0..grid {
            re[i] += c;
            im[i] += s;
            let nc = c * cs - s * ss;
            s = s * cs + c * ss;
            c = nc;
        }
    }
    let n = points.len() as f64;
    re.iter().zip(&im).map(|(a, b)| (a * a + b * b) / n).collect()
}

fn raw_periodogram(points: &[Point2], grid: usize) -> Vec<f64> {
    let h = (grid / 2) as i64;
    // P(−f) = P(f): compute rows ky ≥ 0 and mirror the rest.
    let rows: Vec<i64> = (0..h).collect();
    #[cfg(feature = "parallel")]
    let half: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        rows.par_iter().map(|&ky| raw_row(points, grid, ky)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let half: Vec<Vec<f64>> = rows.iter().map(|&ky| raw_row(points, grid, ky)).collect();
    let mut raw = vec![0.0; grid * grid];
    let at = |kx: i64, ky: i64| ((ky + h) as usize) * grid + (kx + h) as usize;
    for (ky, row) in half.iter().enumerate() {
        raw[at(-h, ky as i64)..at(-h, ky as i64) + grid].copy_from_slice(row);
    }
    // Row −h and column −h have no mirror image inside the grid.
    let bottom = raw_row(points, grid, -h);
    raw[..grid].copy_from_slice(&bottom);
    for ky in (-h + 1)..0 {
        raw[at(-h, ky)] = single(points, -h, ky);
        for kx in (-h + 1)..h {
            raw[at(kx, ky)] = raw[at(-kx, -ky)];
        }
    }
    raw
}

fn single(points: &[Point2], kx: i64, ky: i64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for p in points {
        let (s, c) = (-TAU * (kx as f64 * p.x + ky as f64 * p.y)).sin_cos();
        re += c;
        im += s;
    }
    (re * re + im * im) / points.len() as f64
}

fn radial(grid: usize, raw: Vec<f64>) -> Spectrum {
    let h = (grid / 2) as i64;
    let bins = grid / 2;
    let mut sum = vec![0.0; bins];
    let mut sum2 = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    // Row and column −h are left out so that annuli stay symmetric under
    // quarter turns.
    for ky in (-h + 1)..h {
        for kx in (-h + 1)..h {
            let r = ((kx * kx + ky * ky) as f64).sqrt();
            let b = r.round() as usize;
            if b == 0 || b > bins {
                continue;
            }
            let p = raw[((ky + h) as usize) * grid + (kx + h) as usize];
            sum[b - 1] += p;
            sum2[b - 1] += p * p;
            count[b - 1] += 1;
        }
    }
    let mut radial_power = Vec::with_capacity(bins);
    let mut anisotropy = Vec::with_capacity(bins);
    for b in 0..bins {
        let n = count[b] as f64;
        let mean = sum[b] / n;
        let var = if count[b] > 1 { (sum2[b] - n * mean * mean) / (n - 1.0) } else { 0.0 };
        radial_power.push(mean);
        anisotropy.push(10.0 * (var.max(0.0) / (mean * mean)).log10());
    }
    Spectrum { grid, frequencies: (1..=bins).map(|f| f as f64).collect(), radial_power, anisotropy, raw }
}

/// Mean of several spectra, taken over the raw periodograms.
pub fn average_spectra(spectra: &[Spectrum]) -> Result<Spectrum, AnalysisError> {
    let first = spectra.first().ok_or(AnalysisError::TooFewRuns(0))?;
    if spectra.iter().any(|s| s.grid != first.grid) {
        return Err(AnalysisError::GridMismatch);
    }
    let n = spectra.len() as f64;
    let mut raw = vec![0.0; first.raw.len()];
    for s in spectra {
        for (a, b) in raw.iter_mut().zip(&s.raw) {
            *a += b / n;
        }
    }
    Ok(radial(first.grid, raw))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(v: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = v.into_iter().collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Summary { mean, min, max }
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Per-field summary over repeated runs of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub runs: usize,
    pub vertices: Summary,
    pub theta_min: Summary,
    pub theta_max: Summary,
    pub q_min: Summary,
    pub edge_ratio_min: Summary,
    pub edge_ratio_max: Summary,
    pub area_ratio_min: Summary,
    pub area_ratio_max: Summary,
    pub pct_angles_below_30: Summary,
    pub v567: Summary,
}

impl RunAggregate {
    /// Table with one row: mean vertex count and `%<30`/`v567`, worst case
    /// over the runs for the angle, edge and area extremes.
    pub fn table(&self, label: &str) -> String {
        let row = MeshStats {
            vertices: self.vertices.mean.round() as usize,
            triangles: 0,
            theta_min: self.theta_min.min,
            theta_max: self.theta_max.max,
            q_min: self.q_min.min,
            edge_ratio_min: self.edge_ratio_min.min,
            edge_ratio_max: self.edge_ratio_max.max,
            area_ratio_min: self.area_ratio_min.min,
            area_ratio_max: self.area_ratio_max.max,
            pct_angles_below_30: self.pct_angles_below_30.mean,
            valence: Default::default(),
            v567: self.v567.mean,
        };
        stats_table(&[(label, &row)])
    }
}

/// Aggregates stats of runs that share a configuration key.
pub fn compare_runs<K: PartialEq + Debug>(runs: &[(K, MeshStats)]) -> Result<RunAggregate, AnalysisError> {
    if runs.len() < 2 {
        return Err(AnalysisError::TooFewRuns(runs.len()));
    }
    let key = &runs[0].0;
    if let Some(i) = runs.iter().position(|(k, _)| k != key) {
        return Err(AnalysisError::ConfigMismatch { index: i, expected: format!("{key:?}"), found: format!("{:?}", runs[i].0) });
    }
    let f = |g: fn(&MeshStats) -> f64| Summary::of(runs.iter().map(|(_, s)| g(s)));
    Ok(RunAggregate {
        runs: runs.len(),
        vertices: f(|s| s.vertices as f64),
        theta_min: f(|s| s.theta_min),
        theta_max: f(|s| s.theta_max),
        q_min: f(|s| s.q_min),
        edge_ratio_min: f(|s| s.edge_ratio_min),
        edge_ratio_max: f(|s| s.edge_ratio_max),
        area_ratio_min: f(|s| s.area_ratio_min),
        area_ratio_max: f(|s| s.area_ratio_max),
        pct_angles_below_30: f(|s| s.pct_angles_below_30),
        v567: f(|s| s.v567),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCensus {
    /// Connected gap regions.
    pub gaps: usize,
    pub primitives: usize,
    pub sets: usize,
}

/// Gap counts of the current state, typically right after dart throwing.
pub fn gap_census(t: &RegularTriangulation, ctx: &GapContext) -> Result<GapCensus, AnalysisError> {
    let gaps = detect_gaps(t, &ctx.domain, ctx.epsilon);
    if gaps.is_empty() {
        return Ok(GapCensus::default());
    }
    let a = analyze(t, ctx, &gaps)?;
    let kept: HashSet<_> = a.sets.iter().flat_map(|s| s.triangles.iter()).copied().collect();
    let kept: Vec<_> = gaps.into_iter().filter(|g| kept.contains(&g.tri)).collect();
    Ok(GapCensus { gaps: connected_components(&kept, t)?.len(), primitives: a.primitives.len(), sets: a.sets.len() })
}
