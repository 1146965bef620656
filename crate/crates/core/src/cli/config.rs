use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::BenchConfig;
use crate::error::{Error, Result};
use crate::extraction::ExtractionConfig;
use crate::fitting::{FitConfig, SamplingConfig};
use crate::metrics::MetricsConfig;
use crate::oracle::{load_shape, MeshSdf, Oracle, SignMethod};
use crate::seed::derive_seed;

/// Expansion-point sampling for `fit`. The random stream comes from the
/// run seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub n_total: usize,
    pub uniform_fraction: f64,
    pub surface_jitter_sigma: f64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        let d = SamplingConfig::default();
        Self { n_total: d.n_total, uniform_fraction: d.uniform_fraction, surface_jitter_sigma: d.surface_jitter_sigma }
    }
}

impl SamplingSection {
    pub fn to_config(self, seed: u64) -> SamplingConfig {
        SamplingConfig {
            n_total: self.n_total,
            uniform_fraction: self.uniform_fraction,
            surface_jitter_sigma: self.surface_jitter_sigma,
            rng_seed: derive_seed(seed, "expansion-points"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    #[default]
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
        }
    }
}

/// One declarative run: shape, module sections, seed and output directory.
///
/// ```toml
/// shape = "shapes/sphere.toml"
/// seed = 7
///
/// [fit]
/// order = 3
///
/// [extraction]
/// mesh_res = 128
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Shape definition (TOML) or mesh file (OBJ/PLY/STL). Relative paths
    /// resolve against the config file.
    pub shape: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub mesh_format: MeshFormat,
    pub fit: FitConfig,
    pub sampling: SamplingSection,
    pub extraction: ExtractionConfig,
    pub metrics: MetricsConfig,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            shape: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            mesh_format: MeshFormat::Obj,
            fit: FitConfig::default(),
            sampling: SamplingSection::default(),
            extraction: ExtractionConfig::default(),
            metrics: MetricsConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(shape) = &cfg.shape {
            cfg.shape = Some(base_dir.join(shape));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Checks every section. Does not touch the shape file.
    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        self.sampling.to_config(self.seed).validate()?;
        self.extraction.validate()?;
        if self.metrics.n_points == 0 {
            return Err(Error::Config("metrics.n_points must be at least 1".into()));
        }
        if !(self.metrics.tau > 0.0 && self.metrics.tau.is_finite()) {
            return Err(Error::Config(format!("metrics.tau must be positive, got {}", self.metrics.tau)));
        }
        if self.metrics.reference_res < 2 {
            return Err(Error::Config("metrics.reference_res must be at least 2".into()));
        }
        Ok(())
    }

    pub fn shape_path(&self) -> Result<&Path> {
        self.shape.as_deref().ok_or_else(|| Error::Config("no shape given (config key `shape` or --shape)".into()))
    }

    /// Loads the configured shape. Mesh files are rescaled into the
    /// normalization cube.
    pub fn load_oracle(&self) -> Result<Oracle> {
        let path = self.shape_path()?;
        if !path.is_file() {
            return Err(Error::Config(format!("shape file {} does not exist", path.display())));
        }
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
            Some("obj" | "ply" | "stl") => {
                let mesh = crate::mesh::read_mesh(path)?;
                Ok(MeshSdf::normalized(&mesh, 0.05, SignMethod::default())?.into())
            }
            _ => load_shape(path),
        }
    }
}
