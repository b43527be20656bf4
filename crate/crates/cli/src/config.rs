//! Experiment configuration files.
//!
//! Every section rejects unknown fields, and parsing goes through
//! `serde_path_to_error` so a bad value is reported with its full path
//! (`space.distance.delta: ...`).

use std::path::Path;
use std::sync::Arc;

use pcone::contract::kannan_alpha_sweep;
use pcone::space::SamplingBox;
use pcone::stochastic::SieSpec;
use pcone::{Cone, ConeGaussian, DiracMetric, Distance, Mapping, MappingSpec, PcmSpace, TNorm, TimeGrid};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A configuration problem; the CLI exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at(section: &str, err: impl std::fmt::Display) -> Self {
        Self(format!("{section}: {err}"))
    }
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            ConfigError(format!("invalid config: {}", e.inner()))
        } else {
            ConfigError(format!("invalid config at `{path}`: {}", e.inner()))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    /// Euclidean metric embedded as step distributions.
    Dirac,
    /// Gaussian distance when `u - v` lies in `cone`, the sub-distribution
    /// `delta Phi` otherwise.
    ConeGaussian,
}

/// A plain struct rather than a tagged enum so that errors inside it keep
/// their full path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<Cone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl DistanceSpec {
    fn build(&self, dim: usize) -> Result<Arc<dyn Distance>, ConfigError> {
        match (self.kind, &self.cone, self.delta) {
            (DistanceKind::Dirac, None, None) => Ok(Arc::new(DiracMetric)),
            (DistanceKind::Dirac, _, _) => Err(ConfigError::at("space.distance", "dirac takes no cone or delta")),
            (DistanceKind::ConeGaussian, Some(cone), Some(delta)) => {
                if cone.dim() != dim {
                    return Err(ConfigError::at(
                        "space.distance.cone",
                        "dimension differs from space.dim",
                    ));
                }
                Ok(Arc::new(
                    ConeGaussian::new(cone.clone(), delta).map_err(|e| ConfigError::at("space.distance", e))?,
                ))
            }
            (DistanceKind::ConeGaussian, _, _) => Err(ConfigError::at(
                "space.distance",
                "cone-gaussian needs both `cone` and `delta`",
            )),
        }
    }
}

fn default_tnorm() -> TNorm {
    TNorm::Minimum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub distance: DistanceSpec,
    #[serde(default = "default_tnorm")]
    pub tnorm: TNorm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_cone: Option<Cone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_box: Option<SamplingBox>,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<PcmSpace, ConfigError> {
        let distance = self.distance.build(self.dim)?;
        let mut space = PcmSpace::new(self.dim, distance, self.tnorm).map_err(|e| ConfigError::at("space", e))?;
        if let Some(cone) = &self.point_cone {
            space = space
                .with_cone(cone.clone())
                .map_err(|e| ConfigError::at("space.point_cone", e))?;
        }
        if let Some(b) = &self.sampling_box {
            space = space
                .with_box(b.clone())
                .map_err(|e| ConfigError::at("space.sampling_box", e))?;
        }
        Ok(space)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    /// `count` log-spaced times on `[lower, upper]`.
    Log {
        lower: f64,
        upper: f64,
        count: usize,
    },
    Explicit {
        points: Vec<f64>,
    },
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid, ConfigError> {
        match self {
            GridSpec::Log { lower, upper, count } => TimeGrid::log_spaced(*lower, *upper, *count),
            GridSpec::Explicit { points } => TimeGrid::new(points.clone()),
        }
        .map_err(|e| ConfigError::at("grid", e))
    }
}

pub fn build_grid(spec: &Option<GridSpec>) -> Result<TimeGrid, ConfigError> {
    spec.as_ref().map_or_else(|| Ok(TimeGrid::default()), GridSpec::build)
}

pub fn build_mapping(spec: &MappingSpec, dim: usize) -> Result<Box<dyn Mapping>, ConfigError> {
    spec.build(dim).map_err(|e| ConfigError::at("mapping", e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsConfig {
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub n_points: usize,
    #[serde(default)]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZamfirescuParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn default_pairs() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub space: SpaceSpec,
    pub mapping: MappingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_pairs")]
    pub n_pairs: usize,
    #[serde(default)]
    pub tol: f64,
    #[serde(default)]
    pub banach: Vec<f64>,
    #[serde(default)]
    pub kannan: Vec<f64>,
    /// Adds the standard sweep 0.10, 0.15, ..., 0.45 to `kannan`.
    #[serde(default)]
    pub kannan_sweep: bool,
    #[serde(default)]
    pub chatterjea: Vec<f64>,
    #[serde(default)]
    pub zamfirescu: Vec<ZamfirescuParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ClassifyConfig {
    pub fn kannan_alphas(&self) -> Vec<f64> {
        let mut alphas = self.kannan.clone();
        if self.kannan_sweep {
            alphas.extend(kannan_alpha_sweep());
        }
        alphas
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub alpha: f64,
    #[serde(default)]
    pub tol: f64,
    /// Defaults to the space's t-norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tnorm: Option<TNorm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSpec {
    pub starts: usize,
    pub agree_tol: f64,
}

fn default_max_iter() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub space: SpaceSpec,
    pub mapping: MappingSpec,
    pub x0: Vec<f64>,
    pub eps: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub fixed_point_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SieConfig {
    pub problem: SieSpec,
    pub eps: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}
