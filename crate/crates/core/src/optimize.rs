//! Randomized mesh optimization: remove vertices that violate a valence,
//! angle or edge-length criterion together with their neighborhood, then
//! refill the opened gaps.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::DensityField;
use crate::domain::SamplingDomain;
use crate::geom::{triangle_angles, SiteId};
use crate::mesh::{extract_mesh, Mesh2};
use crate::rng::{derive_seed, stream, tag};
use crate::sampler::{fill_gaps, SampleError, SampleOutput, SamplerConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizeMode {
    Valence,
    Angle,
    EdgeLength,
    /// Valence and angle passes, alternating.
    Joint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub lambda_e: f64,
    /// Passes per criterion before giving up on it.
    pub max_iterations: usize,
    /// Valence/angle alternations in joint mode.
    pub max_interleaves: usize,
    /// Largest fraction of vertices removed in one pass.
    pub removal_cap: f64,
    /// Rings of neighbors removed with each offender.
    pub rings: usize,
    /// Times a spot may offend before its removal grows by one ring.
    pub widen_after: usize,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            theta_lo: 30.0,
            theta_hi: 120.0,
            lambda_e: 3f64.sqrt(),
            max_iterations: 25,
            max_interleaves: 10,
            removal_cap: 0.1,
            rings: 0,
            widen_after: 5,
            seed: 0,
        }
    }
}

impl OptimizeConfig {
    pub fn with_angles(theta_lo: f64, theta_hi: f64) -> Self {
        OptimizeConfig { theta_lo, theta_hi, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(0.0 < self.theta_lo && self.theta_lo < 60.0 && 60.0 < self.theta_hi && self.theta_hi < 180.0) {
            return Err(OptimizeError::InvalidConfig(format!(
                "angle targets must satisfy 0 < lo < 60 < hi < 180, got [{}, {}]",
                self.theta_lo, self.theta_hi
            )));
        }
        if !(self.lambda_e > 0.0) {
            return Err(OptimizeError::InvalidConfig("lambda_e must be positive".into()));
        }
        if !(self.removal_cap > 0.0 && self.removal_cap <= 1.0) {
            return Err(OptimizeError::InvalidConfig("removal_cap must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Valence,
    Angle,
    EdgeLength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub criterion: Criterion,
    pub offenders: usize,
    pub removed: usize,
    pub inserted: usize,
    /// Some neighborhood was grown past the configured ring count.
    pub widened: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub converged: bool,
    pub valence_ok: bool,
    pub angle_ok: bool,
    pub edge_ok: bool,
    /// Removal/refill passes over all criteria.
    pub iterations: usize,
    /// Valence/angle alternations used (joint mode).
    pub interleaves: usize,
    pub passes: Vec<PassRecord>,
}

/// Offending vertices of one criterion, as indices into `m`.
fn offenders(m: &Mesh2, c: Criterion, cfg: &OptimizeConfig, fixed: &HashSet<SiteId>) -> (usize, Vec<SiteId>) {
    let movable = |k: u32| !fixed.contains(&m.sites[k as usize]);
    let mut out: BTreeSet<SiteId> = BTreeSet::new();
    let mut violations = 0;
    match c {
        Criterion::Valence => {
            for (k, &v) in m.valences().iter().enumerate() {
                if m.boundary[k] || (5..=7).contains(&v) {
                    continue;
                }
                violations += 1;
                if movable(k as u32) {
                    out.insert(m.sites[k]);
                }
            }
        }
        Criterion::Angle => {
            for (k, t) in m.triangles.iter().enumerate() {
                let [a, b, c] = m.tri_points(k);
                let ang = triangle_angles(a, b, c);
                for i in 0..3 {
                    if ang[i] >= cfg.theta_lo && ang[i] <= cfg.theta_hi {
                        continue;
                    }
                    violations += 1;
                    // A sharp corner means a short opposite edge; its endpoints are the crowded pair.
                    if ang[i] < cfg.theta_lo {
                        out.extend([t[(i + 1) % 3], t[(i + 2) % 3]].iter().filter(|&&v| movable(v)).map(|&v| m.sites[v as usize]));
                    } else if movable(t[i]) {
                        out.insert(m.sites[t[i] as usize]);
                    } else {
                        out.extend(t.iter().filter(|&&v| movable(v)).map(|&v| m.sites[v as usize]));
                    }
                }
            }
        }
        Criterion::EdgeLength => {
            for (k, t) in m.triangles.iter().enumerate() {
                let p = m.tri_points(k);
                for i in 0..3 {
                    let j = (i + 1) % 3;
                    let (a, b) = (t[i] as usize, t[j] as usize);
                    if p[i].dist(p[j]) > cfg.lambda_e * (m.radii[a] + m.radii[b]) {
                        violations += 1;
                        out.extend([a, b].into_iter().filter(|&v| movable(v as u32)).map(|v| m.sites[v]));
                    }
                }
            }
        }
    }
    (violations, out.into_iter().collect())
}

struct Run<'a> {
    out: &'a mut SampleOutput,
    domain: &'a SamplingDomain,
    rho: &'a DensityField,
    scfg: &'a SamplerConfig,
    cfg: &'a OptimizeConfig,
    fixed: HashSet<SiteId>,
    pass: usize,
    strikes: HashMap<(i64, i64), usize>,
}

impl Run<'_> {
    fn violations(&self, c: Criterion) -> usize {
        let m = extract_mesh(&self.out.triangulation, self.domain);
        offenders(&m, c, self.cfg, &self.fixed).0
    }

    fn neighborhood(&self, id: SiteId, rings: usize) -> Vec<SiteId> {
        let t = &self.out.triangulation;
        let mut set: BTreeSet<SiteId> = BTreeSet::from([id]);
        let mut frontier = vec![id];
        for _ in 0..rings {
            let mut next = Vec::new();
            for v in frontier {
                for n in t.site_neighbors(v).unwrap_or_default() {
                    if set.insert(n) {
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        set.into_iter().filter(|s| !self.fixed.contains(s)).collect()
    }

    /// Lattice cell used to recognize an offender spot across passes.
    fn spot(&self, id: SiteId) -> (i64, i64) {
        let p = self.out.triangulation.site(id).map(|s| s.center).unwrap_or_default();
        let h = 2.0 * self.scfg.r_min;
        ((p.x / h).floor() as i64, (p.y / h).floor() as i64)
    }

    /// One removal/refill pass; returns the violation count seen before it.
    fn pass(&mut self, c: Criterion, report: &mut OptimizeReport) -> Result<usize, OptimizeError> {
        let m = extract_mesh(&self.out.triangulation, self.domain);
        let (violations, mut offs) = offenders(&m, c, self.cfg, &self.fixed);
        if offs.is_empty() {
            return Ok(violations);
        }
        let mut rng = stream(self.cfg.seed, tag::OPTIMIZE, self.pass as u64, 0);
        offs.shuffle(&mut rng);
        let n = self.out.triangulation.num_sites();
        let cap = ((self.cfg.removal_cap * n as f64).ceil() as usize).max(1);
        let mut remove: BTreeSet<SiteId> = BTreeSet::new();
        let mut widened = false;
        for o in offs {
            if remove.contains(&o) {
                continue;
            }
            let strikes = self.strikes.entry(self.spot(o)).or_insert(0);
            *strikes += 1;
            let wide = *strikes > self.cfg.widen_after;
            let hood = self.neighborhood(o, self.cfg.rings + wide as usize);
            let fresh = hood.iter().filter(|s| !remove.contains(s)).count();
            if !remove.is_empty() && remove.len() + fresh > cap {
                break;
            }
            widened |= wide;
            remove.extend(hood);
        }
        // Keep enough sites for a valid triangulation.
        let keep_min = if self.out.triangulation.is_periodic() { 4 } else { 3 };
        let mut removed = 0;
        for id in remove {
            if self.out.triangulation.num_sites() <= keep_min {
                break;
            }
            match self.out.triangulation.remove(id) {
                Ok(()) => {
                    self.out.grid.remove(id);
                    removed += 1;
                }
                Err(e) => log::warn!("could not remove site {id}: {e}"),
            }
        }
        let scfg = SamplerConfig { seed: derive_seed(self.cfg.seed, tag::OPTIMIZE, self.pass as u64), ..self.scfg.clone() };
        let fill = fill_gaps(&mut self.out.triangulation, &mut self.out.grid, self.domain, self.rho, &scfg)?;
        self.pass += 1;
        report.iterations += 1;
        report.passes.push(PassRecord { criterion: c, offenders: violations, removed, inserted: fill.inserted, widened });
        Ok(violations)
    }

    /// Passes on one criterion until it holds or the cap is reached.
    fn criterion(&mut self, c: Criterion, report: &mut OptimizeReport) -> Result<bool, OptimizeError> {
        for _ in 0..self.cfg.max_iterations {
            if self.violations(c) == 0 {
                return Ok(true);
            }
            self.pass(c, report)?;
        }
        Ok(self.violations(c) == 0)
    }
}

/// Runs the optimization in place. Boundary samples of `out` stay fixed.
/// A report with `converged == false` still leaves a valid maximal state.
pub fn optimize(
    out: &mut SampleOutput,
    domain: &SamplingDomain,
    rho: &DensityField,
    scfg: &SamplerConfig,
    cfg: &OptimizeConfig,
    mode: OptimizeMode,
) -> Result<OptimizeReport, OptimizeError> {
    cfg.validate()?;
    let fixed: HashSet<SiteId> = out.boundary.iter().copied().collect();
    let mut run = Run { out, domain, rho, scfg, cfg, fixed, pass: 0, strikes: HashMap::new() };
    let mut report = OptimizeReport::default();
    match mode {
        OptimizeMode::Valence => {
            report.valence_ok = run.criterion(Criterion::Valence, &mut report)?;
            report.converged = report.valence_ok;
        }
        OptimizeMode::Angle => {
            report.angle_ok = run.criterion(Criterion::Angle, &mut report)?;
            report.converged = report.angle_ok;
        }
        OptimizeMode::EdgeLength => {
            report.edge_ok = run.criterion(Criterion::EdgeLength, &mut report)?;
            report.converged = report.edge_ok;
        }
        OptimizeMode::Joint => {
            for g in 0..cfg.max_interleaves {
                if run.violations(Criterion::Valence) == 0 && run.violations(Criterion::Angle) == 0 {
                    break;
                }
                report.interleaves = g + 1;
                run.criterion(Criterion::Valence, &mut report)?;
                run.criterion(Criterion::Angle, &mut report)?;
            }
            report.valence_ok = run.violations(Criterion::Valence) == 0;
            report.angle_ok = run.violations(Criterion::Angle) == 0;
            report.converged = report.valence_ok && report.angle_ok;
        }
    }
    let edge_now = run.violations(Criterion::EdgeLength) == 0;
    if mode != OptimizeMode::EdgeLength {
        report.edge_ok = edge_now;
    }
    Ok(report)
}
