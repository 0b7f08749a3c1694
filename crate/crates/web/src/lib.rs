//! Browser demo: step through dart throwing and gap filling, optimize the
//! resulting mesh, and render everything as SVG.

use gapmps::density::DensityField;
use gapmps::domain::SamplingDomain;
use gapmps::gap::{is_maximal, GapContext};
use gapmps::mesh::{extract_mesh, mesh_stats};
use gapmps::optimize::{optimize, OptimizeConfig, OptimizeMode};
use gapmps::sampler::{SampleOutput, Sampler, SamplerConfig};
use gapmps::svg::{render, SvgOptions};
use gapmps::Point2;
use wasm_bindgen::prelude::*;

enum Stage {
    Sampling(Box<Sampler>),
    Done(Box<SampleOutput>),
    /// Transient while moving between the other two.
    Empty,
}

#[wasm_bindgen]
pub struct Demo {
    domain: SamplingDomain,
    rho: DensityField,
    cfg: SamplerConfig,
    stage: Stage,
    darts: bool,
}

fn domain_named(name: &str) -> Result<SamplingDomain, String> {
    let p = Point2::new;
    match name {
        "periodic" => Ok(SamplingDomain::PeriodicUnitSquare),
        "box" => Ok(SamplingDomain::unit_box()),
        "lshape" => SamplingDomain::polygon(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 0.45), p(0.45, 0.45), p(0.45, 1.0), p(0.0, 1.0)], vec![])
            .map_err(|e| e.to_string()),
        "annulus" => SamplingDomain::annulus(p(0.5, 0.5), 0.5, 0.2, 96).map_err(|e| e.to_string()),
        _ => Err(format!("unknown domain {name:?}")),
    }
}

#[wasm_bindgen]
impl Demo {
    /// `density` is an expression in `x` and `y`, or empty for equal radii.
    #[wasm_bindgen(constructor)]
    pub fn new(domain: &str, r_min: f64, density: &str, seed: u32) -> Result<Demo, String> {
        let domain = domain_named(domain)?;
        let (rho, cfg) = if density.trim().is_empty() {
            (DensityField::Uniform(1.0 / (r_min * r_min)), SamplerConfig::uniform(r_min))
        } else {
            (DensityField::expression(density).map_err(|e| e.to_string())?, SamplerConfig::new(r_min))
        };
        let cfg = cfg.with_seed(seed as u64);
        let sampler = Sampler::new(domain.clone(), rho.clone(), cfg.clone()).map_err(|e| e.to_string())?;
        Ok(Demo { domain, rho, cfg, stage: Stage::Sampling(Box::new(sampler)), darts: false })
    }

    /// Advances sampling by one stage: the dart throw, then one gap-filling
    /// pass per call. Returns a status line.
    pub fn step(&mut self) -> Result<String, String> {
        let Stage::Sampling(s) = &mut self.stage else {
            return Ok("maximal".into());
        };
        if !self.darts {
            let n = s.dart_throw().map_err(|e| e.to_string())?;
            s.triangulate().map_err(|e| e.to_string())?;
            self.darts = true;
            return Ok(format!("dart throwing placed {n} samples"));
        }
        match s.fill_step().map_err(|e| e.to_string())? {
            Some(it) => Ok(format!(
                "fill pass {}: {} gap triangles in {} sets, {} samples added",
                s.stats().fill.iterations,
                it.gap_triangles,
                it.sets,
                it.inserted
            )),
            None => {
                let Stage::Sampling(s) = std::mem::replace(&mut self.stage, Stage::Empty) else { unreachable!() };
                let out = s.into_output().map_err(|e| e.to_string())?;
                let msg = format!("maximal with {} samples", out.triangulation.num_sites());
                self.stage = Stage::Done(Box::new(out));
                Ok(msg)
            }
        }
    }

    /// Steps until the set is maximal.
    pub fn finish(&mut self) -> Result<String, String> {
        let mut last = String::new();
        for _ in 0..=self.cfg.max_fill_iterations + 1 {
            if self.is_maximal() {
                break;
            }
            last = self.step()?;
        }
        Ok(last)
    }

    pub fn is_maximal(&self) -> bool {
        matches!(self.stage, Stage::Done(_))
    }

    pub fn count(&self) -> usize {
        match &self.stage {
            Stage::Sampling(s) => s.sites().len(),
            Stage::Done(o) => o.triangulation.num_sites(),
            Stage::Empty => 0,
        }
    }

    /// Runs the optimizer on the maximal set; `mode` is `valence`, `angle`,
    /// `edge` or `joint`. Returns the report as JSON.
    pub fn optimize(&mut self, mode: &str, theta_lo: f64, theta_hi: f64) -> Result<String, String> {
        self.finish()?;
        let mode = match mode {
            "valence" => OptimizeMode::Valence,
            "angle" => OptimizeMode::Angle,
            "edge" => OptimizeMode::EdgeLength,
            "joint" => OptimizeMode::Joint,
            m => return Err(format!("unknown mode {m:?}")),
        };
        let Stage::Done(out) = &mut self.stage else { return Err("sampling did not finish".into()) };
        let cfg = OptimizeConfig { seed: self.cfg.seed, ..OptimizeConfig::with_angles(theta_lo, theta_hi) };
        let report = optimize(out, &self.domain, &self.rho, &self.cfg, &cfg, mode).map_err(|e| e.to_string())?;
        serde_json::to_string(&report).map_err(|e| e.to_string())
    }

    /// Mesh statistics of the current state as JSON; empty object before
    /// triangulation.
    pub fn stats(&self) -> String {
        let t = match &self.stage {
            Stage::Sampling(s) => s.triangulation(),
            Stage::Done(o) => Some(&o.triangulation),
            Stage::Empty => None,
        };
        match t {
            Some(t) => serde_json::to_string(&mesh_stats(&extract_mesh(t, &self.domain), self.cfg.r_min)).unwrap_or_default(),
            None => "{}".into(),
        }
    }

    pub fn svg(&self, size: f64, disks: bool, gaps: bool, mesh: bool, valence: bool) -> Result<String, String> {
        let opts = SvgOptions { size, disks, centers: true, gaps, mesh, valence };
        let ctx = GapContext::new(&self.domain, self.cfg.epsilon_gap);
        let t = match &self.stage {
            Stage::Sampling(s) => s.triangulation(),
            Stage::Done(o) => Some(&o.triangulation),
            Stage::Empty => None,
        };
        match t {
            Some(t) => render(t, &ctx, &opts).map_err(|e| e.to_string()),
            None => Ok(format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}"></svg>"#)),
        }
    }

    /// Whether the current triangulation has no uncovered point left.
    pub fn audit(&self) -> bool {
        match &self.stage {
            Stage::Done(o) => is_maximal(&o.triangulation, &GapContext::new(&self.domain, self.cfg.epsilon_gap)),
            _ => false,
        }
    }
}
