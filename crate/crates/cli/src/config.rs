//! Run configuration: what a points file header records and what `--config`
//! files contain.

use std::path::{Path, PathBuf};

use gapmps::density::DensityField;
use gapmps::domain::SamplingDomain;
use gapmps::io::{parse_polygon, Pgm, PointsFile};
use gapmps::optimize::{OptimizeConfig, OptimizeMode};
use gapmps::sampler::SamplerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DomainSpec {
    Periodic,
    Box,
    Polygon { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DensitySpec {
    /// `1 / r_min²`, which gives equal radii.
    Default,
    Uniform { value: f64 },
    Grid { path: PathBuf, lo: Option<f64>, hi: Option<f64> },
    Expr { source: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub density: DensitySpec,
    pub r_min: f64,
    pub r_max: Option<f64>,
    pub seed: u64,
    pub k_reject: Option<usize>,
    pub max_fill_iterations: Option<usize>,
    #[serde(default)]
    pub dart_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSpec {
    pub mode: OptimizeMode,
    pub config: OptimizeConfig,
}

/// A resolved run: the config plus the objects it describes.
pub struct Resolved {
    pub config: RunConfig,
    pub domain: SamplingDomain,
    pub density: DensityField,
    pub sampler: SamplerConfig,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(CliError::Config(format!("--rmin must be positive, got {}", self.r_min)));
        }
        let domain = match &self.domain {
            DomainSpec::Periodic => SamplingDomain::PeriodicUnitSquare,
            DomainSpec::Box => SamplingDomain::unit_box(),
            DomainSpec::Polygon { path } => parse_polygon(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        };
        let r_max = self.r_max.unwrap_or(16.0 * self.r_min);
        let density = match &self.density {
            DensitySpec::Default => DensityField::Uniform(1.0 / (self.r_min * self.r_min)),
            DensitySpec::Uniform { value } => DensityField::Uniform(*value),
            DensitySpec::Expr { source } => DensityField::expression(source).map_err(|e| CliError::Config(e.to_string()))?,
            DensitySpec::Grid { path, lo, hi } => {
                let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let img = Pgm::parse(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let (blo, bhi) = domain.bbox();
                let lo = lo.unwrap_or(1.0 / (r_max * r_max));
                let hi = hi.unwrap_or(1.0 / (self.r_min * self.r_min));
                img.to_density(lo, hi, blo, bhi).map_err(|e| CliError::Config(e.to_string()))?
            }
        };
        let mut sampler = match self.density {
            DensitySpec::Default if self.r_max.is_none() => SamplerConfig::uniform(self.r_min),
            _ => SamplerConfig { r_max, ..SamplerConfig::new(self.r_min) },
        };
        sampler.seed = self.seed;
        if let Some(k) = self.k_reject {
            sampler.k_reject = k;
        }
        if let Some(m) = self.max_fill_iterations {
            sampler.max_fill_iterations = m;
        }
        sampler.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Resolved { config: self.clone(), domain, density, sampler })
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

pub fn config_hash<T: Serialize>(v: &T) -> String {
    let json = serde_json::to_string(v).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Header lines recording version, seed, config hash and the config itself.
pub fn provenance(run: &RunConfig, opt: Option<&OptimizeSpec>, boundary: usize) -> Vec<String> {
    let mut h = vec![format!(" gapmps {}", env!("CARGO_PKG_VERSION")), format!(" seed: {}", run.seed)];
    match opt {
        Some(o) => h.push(format!(" config-hash: {}", config_hash(&(run, o)))),
        None => h.push(format!(" config-hash: {}", run.hash())),
    }
    h.push(format!(" config: {}", serde_json::to_string(run).expect("config serializes")));
    if let Some(o) = opt {
        h.push(format!(" optimize: {}", serde_json::to_string(o).expect("config serializes")));
    }
    h.push(format!(" boundary: {boundary}"));
    h
}

pub fn header_config(f: &PointsFile) -> Result<Option<RunConfig>, CliError> {
    match f.header_value("config") {
        None => Ok(None),
        Some(s) => serde_json::from_str(s).map(Some).map_err(|e| CliError::Config(format!("bad config header: {e}"))),
    }
}

pub fn header_boundary(f: &PointsFile) -> Result<usize, CliError> {
    match f.header_value("boundary") {
        None => Ok(0),
        Some(s) => s.parse().map_err(|_| CliError::Config(format!("bad boundary header {s:?}"))),
    }
}

pub fn parse_domain(v: &[String]) -> Result<DomainSpec, CliError> {
    match v {
        [k] if k == "periodic" => Ok(DomainSpec::Periodic),
        [k] if k == "box" => Ok(DomainSpec::Box),
        [k, path] if k == "polygon" => Ok(DomainSpec::Polygon { path: path.into() }),
        _ => Err(CliError::Config(format!("--domain expects `periodic`, `box` or `polygon FILE`, got {v:?}"))),
    }
}

pub fn parse_density(v: &[String], range: Option<&[f64]>) -> Result<DensitySpec, CliError> {
    match v {
        [k, x] if k == "uniform" => {
            let value: f64 = x.parse().map_err(|_| CliError::Config(format!("bad density value {x:?}")))?;
            Ok(DensitySpec::Uniform { value })
        }
        [k, path] if k == "grid" => Ok(DensitySpec::Grid { path: path.into(), lo: range.map(|r| r[0]), hi: range.map(|r| r[1]) }),
        [k, source] if k == "expr" => Ok(DensitySpec::Expr { source: source.clone() }),
        _ => Err(CliError::Config(format!("--density expects `uniform V`, `grid FILE` or `expr STR`, got {v:?}"))),
    }
}
