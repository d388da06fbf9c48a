//! JSON run configuration. Every field is optional; command-line flags win.

use std::path::{Path, PathBuf};

use radon_dsm::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub phantom: PhantomConfig,
    #[serde(default)]
    pub angles: AnglesConfig,
    #[serde(default)]
    pub t_axis: TAxisConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub dsm: DsmSection,
    #[serde(default)]
    pub fbp: FbpSection,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub name: Option<String>,
    pub resolution: Option<usize>,
    pub half_width: Option<f64>,
}

/// Planar sets take `count` or `increment_deg`; spatial sets take `directions`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesConfig {
    pub count: Option<usize>,
    pub increment_deg: Option<f64>,
    pub directions: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TAxisConfig {
    pub radius: Option<f64>,
    pub dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub model: Option<String>,
    pub level: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsmSection {
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub h: Option<f64>,
    pub phi: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbpSection {
    pub window: Option<String>,
    pub cutoff: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }

    /// `path` under `output_dir` unless it is absolute.
    pub fn output(&self, path: &Path) -> PathBuf {
        match &self.output_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}
