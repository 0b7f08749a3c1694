//! Two-phase maximal Poisson-disk sampling: grid-accelerated dart throwing,
//! then gap filling over independent gap sets until no gap remains.

use web_time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::DensityField;
use crate::domain::{sample_boundary, SamplingDomain};
use crate::gap::{self, GapAnalysis, GapContext, GapError, GapPrimitive, GapState};
use crate::geom::{Point2, SiteId, WeightedSite};
use crate::grid::AccelGrid;
use crate::polygon::{area, sample_triangle};
use crate::rng::{stream, tag};
use crate::triangulation::{RegularTriangulation, TriangleRef, TriangulationError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("NonPositiveDensity: ρ({0}) = {1}")]
    NonPositiveDensity(Point2, f64),
    #[error("EmptyDomain: the domain has no area to sample")]
    EmptyDomain,
    #[error("IterationCapExceeded: still not maximal after {0} gap-filling iterations")]
    IterationCapExceeded(usize),
    #[error("NonDecreasingSchedule: radii must strictly decrease")]
    NonDecreasingSchedule,
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Gap(#[from] GapError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub k_reject: usize,
    pub seed: u64,
    pub max_fill_iterations: usize,
    pub epsilon_gap: f64,
}

impl SamplerConfig {
    /// Defaults: `r_max = 16 r_min`, 300 consecutive rejections, 50 passes.
    pub fn new(r_min: f64) -> Self {
        SamplerConfig {
            r_min,
            r_max: 16.0 * r_min,
            k_reject: 300,
            seed: 0,
            max_fill_iterations: 50,
            epsilon_gap: gap::default_epsilon(r_min),
        }
    }

    /// Equal radii `r` everywhere.
    pub fn uniform(r: f64) -> Self {
        SamplerConfig { r_max: r, ..Self::new(r) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(SampleError::InvalidConfig(format!("r_min must be positive, got {}", self.r_min)));
        }
        if !(self.r_max >= self.r_min) || !self.r_max.is_finite() {
            return Err(SampleError::InvalidConfig(format!("r_max {} below r_min {}", self.r_max, self.r_min)));
        }
        if self.k_reject == 0 {
            return Err(SampleError::InvalidConfig("k_reject must be at least 1".into()));
        }
        if !(self.epsilon_gap >= 0.0) {
            return Err(SampleError::InvalidConfig("epsilon_gap must be non-negative".into()));
        }
        Ok(())
    }
}

/// `clamp(1/√ρ(p), r_min, r_max)`.
pub fn radius_at(rho: &DensityField, p: Point2, cfg: &SamplerConfig) -> Result<f64, SampleError> {
    let v = rho.eval(p);
    if !(v > 0.0) {
        return Err(SampleError::NonPositiveDensity(p, v));
    }
    Ok((1.0 / v.sqrt()).clamp(cfg.r_min, cfg.r_max))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FillIteration {
    pub gap_triangles: usize,
    pub primitives: usize,
    pub sets: usize,
    pub inserted: usize,
    /// Inserted at deterministic fallback points after random draws failed.
    pub fallback: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FillReport {
    pub iterations: usize,
    pub inserted: usize,
    pub shrink_events: usize,
    pub passes: Vec<FillIteration>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub dart_seconds: f64,
    pub triangulate_seconds: f64,
    pub fill_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub boundary_samples: usize,
    pub dart_samples: usize,
    pub fill: FillReport,
    pub final_count: usize,
    pub timing: Timing,
}

/// Output of [`dart_throw`]. Boundary samples come first.
#[derive(Clone, Debug)]
pub struct DartThrow {
    pub sites: Vec<WeightedSite>,
    pub grid: AccelGrid,
    pub boundary: usize,
}

/// Triangles with a cumulative area×density table.
struct Cpdf {
    tris: Vec<[Point2; 3]>,
    cum: Vec<f64>,
}

impl Cpdf {
    fn new(tris: Vec<[Point2; 3]>, rho: &DensityField) -> Self {
        let mut cum = Vec::with_capacity(tris.len());
        let mut acc = 0.0;
        for t in &tris {
            let c = (t[0] + t[1] + t[2]) * (1.0 / 3.0);
            acc += area(t) * rho.eval(c).max(0.0);
            cum.push(acc);
        }
        Cpdf { tris, cum }
    }

    fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point2 {
        let x = rng.gen::<f64>() * self.total();
        let k = self.cum.partition_point(|&c| c <= x).min(self.tris.len() - 1);
        let [a, b, c] = self.tris[k];
        sample_triangle(a, b, c, rng.gen(), rng.gen())
    }
}

/// Splits triangles 4-way until their longest edge is at most `h`.
fn refine(tris: Vec<[Point2; 3]>, h: f64) -> Vec<[Point2; 3]> {
    let mut out = Vec::new();
    let mut stack = tris;
    while let Some(t) = stack.pop() {
        let longest = t[0].dist(t[1]).max(t[1].dist(t[2])).max(t[2].dist(t[0]));
        if longest <= h {
            out.push(t);
            continue;
        }
        let m01 = t[0].lerp(t[1], 0.5);
        let m12 = t[1].lerp(t[2], 0.5);
        let m20 = t[2].lerp(t[0], 0.5);
        stack.extend([[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m01, m12, m20]]);
    }
    out
}

fn domain_cpdf(domain: &SamplingDomain, rho: &DensityField, cfg: &SamplerConfig) -> Cpdf {
    let tris = domain.triangles();
    let tris = if rho.is_uniform() {
        tris
    } else {
        let (lo, hi) = domain.bbox();
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        refine(tris, (4.0 * cfg.r_min).max(extent / 256.0))
    };
    Cpdf::new(tris, rho)
}

/// Dart throwing until `k_reject` consecutive candidates are rejected. On
/// bounded domains the boundary is sampled first and those samples are kept.
pub fn dart_throw(domain: &SamplingDomain, rho: &DensityField, cfg: &SamplerConfig) -> Result<DartThrow, SampleError> {
    cfg.validate()?;
    if !(domain.area() > 0.0) {
        return Err(SampleError::EmptyDomain);
    }
    let mut grid = AccelGrid::new(domain, cfg.r_min);
    let mut sites: Vec<WeightedSite> = Vec::new();
    if !domain.is_periodic() {
        let err = std::cell::RefCell::new(None);
        let pts = sample_boundary(domain, |p| match radius_at(rho, p, cfg) {
            Ok(r) => r,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                cfg.r_min
            }
        });
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        for (p, r) in pts {
            let id = SiteId(sites.len() as u32);
            grid.insert(id, p, r);
            sites.push(WeightedSite::new(id, p, r));
        }
    }
    let boundary = sites.len();
    let cpdf = domain_cpdf(domain, rho, cfg);
    if !(cpdf.total() > 0.0) {
        return Err(SampleError::EmptyDomain);
    }
    let mut rng = stream(cfg.seed, tag::DART, 0, 0);
    let mut misses = 0;
    while misses < cfg.k_reject {
        let p = domain.wrap(cpdf.draw(&mut rng));
        if grid.cell_covered(p) || !domain.contains(p) {
            misses += 1;
            continue;
        }
        let r = radius_at(rho, p, cfg)?;
        if grid.accepts(p, r) {
            let id = SiteId(sites.len() as u32);
            grid.insert(id, p, r);
            sites.push(WeightedSite::new(id, p, r));
            misses = 0;
        } else {
            misses += 1;
        }
    }
    Ok(DartThrow { sites, grid, boundary })
}

/// Grid holding the current disks of a triangulation.
pub fn grid_from_triangulation(t: &RegularTriangulation, domain: &SamplingDomain, r_min: f64) -> AccelGrid {
    let mut g = AccelGrid::new(domain, r_min);
    for s in t.sites() {
        g.insert(s.id, s.center, s.radius());
    }
    g
}

/// A candidate produced by a gap-set worker.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    p: Point2,
    owner: Option<TriangleRef>,
}

/// Random draws per primitive before it is left for the next pass.
const PRIMITIVE_TRIES: usize = 32;

struct Filler<'a> {
    ctx: &'a GapContext,
    rho: &'a DensityField,
    cfg: &'a SamplerConfig,
}

impl Filler<'_> {
    /// Radius for a new disk at `p`, or `None` when `p` is covered.
    /// `extra` holds disks accepted earlier in the same batch.
    fn admit(&self, grid: &AccelGrid, extra: &[(Point2, f64)], p: Point2) -> Option<(f64, bool)> {
        let d = &self.ctx.domain;
        if grid.is_covered(p) || extra.iter().any(|&(c, r)| d.distance2(c, p) < r * r) {
            return None;
        }
        let r_at = radius_at(self.rho, p, self.cfg).ok()?;
        let mut r = r_at;
        if let Some((_, dist)) = grid.nearest_center_within(p, r) {
            r = dist;
        }
        for &(c, _) in extra {
            let dist = d.distance2(c, p).sqrt();
            if dist < r {
                r = dist;
            }
        }
        (r > 0.0).then_some((r, r < r_at))
    }

    fn in_domain(&self, p: Point2) -> bool {
        self.ctx.domain.is_periodic() || self.ctx.domain.contains(p)
    }

    /// One candidate per primitive of a gap set, in primitive order.
    fn sample_set(&self, grid: &AccelGrid, prims: &[&GapPrimitive], orphans: &[(TriangleRef, Point2)], mut rng: ChaCha8Rng) -> Vec<Candidate> {
        let dom = &self.ctx.domain;
        let mut local: Vec<(Point2, f64)> = Vec::new();
        let mut out = Vec::new();
        for prim in prims {
            let v = &prim.vertices;
            let fan: Vec<[Point2; 3]> = (1..v.len() - 1).map(|i| [v[0], v[i], v[i + 1]]).collect();
            let cpdf = Cpdf::new(fan, self.rho);
            if !(cpdf.total() > 0.0) {
                continue;
            }
            for _ in 0..PRIMITIVE_TRIES {
                let p = dom.wrap(cpdf.draw(&mut rng));
                if !self.in_domain(p) {
                    continue;
                }
                if let Some((r, _)) = self.admit(grid, &local, p) {
                    local.push((p, r));
                    out.push(Candidate { p, owner: Some(prim.owner) });
                    break;
                }
            }
        }
        for &(owner, c) in orphans {
            let p = dom.wrap(c);
            if self.in_domain(p) {
                if let Some((r, _)) = self.admit(grid, &local, p) {
                    local.push((p, r));
                    out.push(Candidate { p, owner: Some(owner) });
                }
            }
        }
        out
    }

    /// Applies candidates in order, re-checking each against the grid.
    fn apply(&self, t: &mut RegularTriangulation, grid: &mut AccelGrid, cands: &[Candidate], report: &mut FillReport) -> usize {
        let mut n = 0;
        for c in cands {
            let Some((r, shrunk)) = self.admit(grid, &[], c.p) else { continue };
            let hint = c.owner.filter(|&o| t.is_live(o));
            match t.insert(c.p, r, hint) {
                Ok(id) => {
                    let s = *t.site(id).expect("inserted site");
                    grid.insert(id, s.center, s.radius());
                    n += 1;
                    if shrunk {
                        report.shrink_events += 1;
                        log::debug!("radius of site {id} shrunk to {r:e}");
                    }
                }
                Err(e) => log::warn!("skipping gap sample at {}: {e}", c.p),
            }
        }
        n
    }

    /// One gap-filling pass. Returns `None` when the state is maximal.
    fn pass(
        &self,
        t: &mut RegularTriangulation,
        grid: &mut AccelGrid,
        state: &mut GapState,
        iteration: usize,
        report: &mut FillReport,
    ) -> Result<Option<FillIteration>, SampleError> {
        let gaps = state.gaps();
        if t.is_periodic() && gaps.is_empty() {
            return Ok(None);
        }
        let analysis: GapAnalysis = gap::analyze(t, self.ctx, &gaps)?;
        if analysis.sets.is_empty() && gap::is_maximal(t, self.ctx) {
            return Ok(None);
        }
        let mut it = FillIteration {
            gap_triangles: analysis.sets.iter().map(|s| s.triangles.len()).sum(),
            primitives: analysis.primitives.len(),
            sets: analysis.sets.len(),
            ..Default::default()
        };

        let jobs: Vec<(Vec<&GapPrimitive>, Vec<(TriangleRef, Point2)>)> = analysis
            .sets
            .iter()
            .map(|s| {
                let prims: Vec<&GapPrimitive> = s.primitives.iter().map(|&k| &analysis.primitives[k]).collect();
                let orphans = s
                    .triangles
                    .iter()
                    .filter(|tr| !prims.iter().any(|p| p.owner == **tr))
                    .map(|&tr| (tr, t.tri_center(tr)))
                    .collect();
                (prims, orphans)
            })
            .collect();
        let seed = self.cfg.seed;
        let work = |(k, (prims, orphans)): (usize, &(Vec<&GapPrimitive>, Vec<(TriangleRef, Point2)>))| {
            self.sample_set(grid, prims, orphans, stream(seed, tag::FILL, k as u64, iteration as u64))
        };
        #[cfg(feature = "parallel")]
        let batches: Vec<Vec<Candidate>> = {
            use rayon::prelude::*;
            jobs.par_iter().enumerate().map(work).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let batches: Vec<Vec<Candidate>> = jobs.iter().enumerate().map(work).collect();

        let cands: Vec<Candidate> = batches.into_iter().flatten().collect();
        it.inserted = self.apply(t, grid, &cands, report);

        if it.inserted == 0 {
            // Random draws missed every remaining gap: fall back to points known
            // to be uncovered.
            let mut fb: Vec<Candidate> = gap::detect_gaps(t, &self.ctx.domain, self.ctx.epsilon)
                .into_iter()
                .map(|g| Candidate { p: self.ctx.domain.wrap(g.power_center), owner: Some(g.tri) })
                .collect();
            fb.extend(gap::clip_boundary_gaps(t, self.ctx)?.into_iter().map(|b| Candidate { p: b.witness, owner: None }));
            it.fallback = self.apply(t, grid, &fb, report);
            it.inserted = it.fallback;
        }
        let journal = t.take_journal();
        state.recompute_local(t, &journal)?;
        report.inserted += it.inserted;
        Ok(Some(it))
    }
}

/// Fills gaps until none remains; the grid must hold the triangulation's
/// disks and is kept in sync. Returns the number of passes used.
pub fn fill_gaps(
    t: &mut RegularTriangulation,
    grid: &mut AccelGrid,
    domain: &SamplingDomain,
    rho: &DensityField,
    cfg: &SamplerConfig,
) -> Result<FillReport, SampleError> {
    cfg.validate()?;
    let ctx = GapContext::new(domain, cfg.epsilon_gap);
    let filler = Filler { ctx: &ctx, rho, cfg };
    t.clear_journal();
    let mut state = GapState::new(t, cfg.epsilon_gap);
    let mut report = FillReport::default();
    loop {
        if report.iterations >= cfg.max_fill_iterations {
            // One last look before giving up.
            if gap::is_maximal(t, &ctx) {
                return Ok(report);
            }
            return Err(SampleError::IterationCapExceeded(report.iterations));
        }
        match filler.pass(t, grid, &mut state, report.iterations, &mut report)? {
            Some(it) => {
                log::debug!("fill pass {}: {:?}", report.iterations, it);
                report.passes.push(it);
                report.iterations += 1;
            }
            None => return Ok(report),
        }
    }
}

/// Stepwise sampler session: dart throwing, triangulation, gap filling.
pub struct Sampler {
    domain: SamplingDomain,
    rho: DensityField,
    cfg: SamplerConfig,
    ctx: GapContext,
    grid: AccelGrid,
    sites: Vec<WeightedSite>,
    boundary: usize,
    tri: Option<RegularTriangulation>,
    state: Option<GapState>,
    stats: SampleStats,
}

impl Sampler {
    pub fn new(domain: SamplingDomain, rho: DensityField, cfg: SamplerConfig) -> Result<Self, SampleError> {
        cfg.validate()?;
        let ctx = GapContext::new(&domain, cfg.epsilon_gap);
        let grid = AccelGrid::new(&domain, cfg.r_min);
        Ok(Sampler { domain, rho, cfg, ctx, grid, sites: Vec::new(), boundary: 0, tri: None, state: None, stats: SampleStats::default() })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn domain(&self) -> &SamplingDomain {
        &self.domain
    }

    pub fn density(&self) -> &DensityField {
        &self.rho
    }

    pub fn stats(&self) -> &SampleStats {
        &self.stats
    }

    /// Ids of the fixed boundary samples.
    pub fn boundary_sites(&self) -> Vec<SiteId> {
        (0..self.boundary as u32).map(SiteId).collect()
    }

    pub fn dart_throw(&mut self) -> Result<usize, SampleError> {
        let t0 = Instant::now();
        let d = dart_throw(&self.domain, &self.rho, &self.cfg)?;
        self.sites = d.sites;
        self.grid = d.grid;
        self.boundary = d.boundary;
        self.tri = None;
        self.state = None;
        self.stats.boundary_samples = d.boundary;
        self.stats.dart_samples = self.sites.len() - d.boundary;
        self.stats.final_count = self.sites.len();
        self.stats.timing.dart_seconds = t0.elapsed().as_secs_f64();
        Ok(self.sites.len())
    }

    /// Builds the triangulation over the dart-throw output.
    pub fn triangulate(&mut self) -> Result<&RegularTriangulation, SampleError> {
        if self.tri.is_none() {
            let t0 = Instant::now();
            let mut t = RegularTriangulation::build(&self.sites, &self.domain)?;
            t.clear_journal();
            self.state = Some(GapState::new(&t, self.cfg.epsilon_gap));
            self.tri = Some(t);
            self.stats.timing.triangulate_seconds = t0.elapsed().as_secs_f64();
        }
        Ok(self.tri.as_ref().unwrap())
    }

    /// One gap-filling pass; `None` once maximal.
    pub fn fill_step(&mut self) -> Result<Option<FillIteration>, SampleError> {
        self.triangulate()?;
        let t0 = Instant::now();
        let filler = Filler { ctx: &self.ctx, rho: &self.rho, cfg: &self.cfg };
        let t = self.tri.as_mut().unwrap();
        let state = self.state.as_mut().unwrap();
        let it = self.stats.fill.iterations;
        let out = filler.pass(t, &mut self.grid, state, it, &mut self.stats.fill)?;
        if let Some(ref step) = out {
            self.stats.fill.passes.push(step.clone());
            self.stats.fill.iterations += 1;
        }
        self.stats.final_count = t.num_sites();
        self.stats.timing.fill_seconds += t0.elapsed().as_secs_f64();
        Ok(out)
    }

    /// Runs passes until maximal.
    pub fn fill_gaps(&mut self) -> Result<usize, SampleError> {
        let start = self.stats.fill.iterations;
        while self.fill_step()?.is_some() {
            if self.stats.fill.iterations - start >= self.cfg.max_fill_iterations {
                let t = self.tri.as_ref().unwrap();
                if gap::is_maximal(t, &self.ctx) {
                    break;
                }
                return Err(SampleError::IterationCapExceeded(self.stats.fill.iterations - start));
            }
        }
        Ok(self.stats.fill.iterations - start)
    }

    /// Sites in id order: before triangulation the dart-throw output,
    /// afterwards the live triangulation sites.
    pub fn sites(&self) -> Vec<WeightedSite> {
        match &self.tri {
            Some(t) => t.sites().copied().collect(),
            None => self.sites.clone(),
        }
    }

    pub fn triangulation(&self) -> Option<&RegularTriangulation> {
        self.tri.as_ref()
    }

    pub fn grid(&self) -> &AccelGrid {
        &self.grid
    }

    pub fn gap_context(&self) -> &GapContext {
        &self.ctx
    }

    pub fn into_output(mut self) -> Result<SampleOutput, SampleError> {
        self.triangulate()?;
        let boundary = self.boundary_sites();
        let t = self.tri.unwrap();
        self.stats.final_count = t.num_sites();
        Ok(SampleOutput { triangulation: t, grid: self.grid, boundary, stats: self.stats })
    }
}

pub struct SampleOutput {
    pub triangulation: RegularTriangulation,
    pub grid: AccelGrid,
    /// Fixed boundary samples (bounded domains only).
    pub boundary: Vec<SiteId>,
    pub stats: SampleStats,
}

impl SampleOutput {
    /// Wraps an existing sample set; `boundary` lists the fixed samples.
    pub fn from_sites(sites: &[WeightedSite], domain: &SamplingDomain, boundary: Vec<SiteId>) -> Result<Self, SampleError> {
        let r_min = sites.iter().map(|s| s.radius()).fold(f64::INFINITY, f64::min);
        if !(r_min > 0.0 && r_min.is_finite()) {
            return Err(SampleError::InvalidConfig("sample set is empty or has a non-positive radius".into()));
        }
        let triangulation = RegularTriangulation::build(sites, domain)?;
        let grid = grid_from_triangulation(&triangulation, domain, r_min);
        let stats = SampleStats { final_count: sites.len(), ..Default::default() };
        Ok(SampleOutput { triangulation, grid, boundary, stats })
    }

    pub fn sites(&self) -> Vec<WeightedSite> {
        self.triangulation.sites().copied().collect()
    }
}

/// Dart throwing followed by gap filling.
pub fn maximal_sample(domain: &SamplingDomain, rho: &DensityField, cfg: &SamplerConfig) -> Result<SampleOutput, SampleError> {
    let mut s = Sampler::new(domain.clone(), rho.clone(), cfg.clone())?;
    s.dart_throw()?;
    s.triangulate()?;
    s.fill_gaps()?;
    s.into_output()
}

/// Nested maximal sets for a strictly decreasing list of uniform radii. Each
/// level keeps all earlier samples, shrinks every radius to the new value and
/// fills the gaps this opens.
pub fn progressive_sample(domain: &SamplingDomain, cfg: &SamplerConfig, schedule: &[f64]) -> Result<Vec<Vec<WeightedSite>>, SampleError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(SampleError::NonDecreasingSchedule);
    }
    let level_cfg = |r: f64| SamplerConfig {
        r_min: r,
        r_max: r,
        epsilon_gap: gap::default_epsilon(r),
        ..cfg.clone()
    };
    let r0 = schedule[0];
    let rho0 = DensityField::Uniform(1.0 / (r0 * r0));
    let first = maximal_sample(domain, &rho0, &level_cfg(r0))?;
    let mut t = first.triangulation;
    let mut levels = vec![t.sites().copied().collect::<Vec<_>>()];
    for (k, &r) in schedule.iter().enumerate().skip(1) {
        let c = SamplerConfig { seed: crate::rng::derive_seed(cfg.seed, tag::FILL, k as u64), ..level_cfg(r) };
        t.set_all_radii(r)?;
        let mut grid = grid_from_triangulation(&t, domain, r);
        fill_gaps(&mut t, &mut grid, domain, &DensityField::Uniform(1.0 / (r * r)), &c)?;
        levels.push(t.sites().copied().collect());
    }
    Ok(levels)
}
