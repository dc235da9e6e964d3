//! Structured TOML configuration shared by the scene, the environment, the
//! baselines and the benchmark harness.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::RewardMode;
use crate::io::pgm;
use crate::optics::{Emitter, LensElement, LensSystem, RenderParams, Sensor, Stop};
use crate::pattern::{self, Bitmap};
use crate::{Error, Result};

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub lens: LensSection,
    pub sensor: Sensor,
    pub emitter: EmitterSection,
    #[serde(default)]
    pub render: RenderParams,
    #[serde(default)]
    pub env: EnvSection,
    #[serde(default)]
    pub baseline: BaselineSection,
    #[serde(default)]
    pub bench: BenchSection,
    /// Directory relative pattern paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensSection {
    #[serde(default)]
    pub pivot_z: f64,
    #[serde(default)]
    pub elements: Vec<LensElement>,
    pub stop: Option<Stop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub distance_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub pattern: PatternSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternSource {
    File { path: PathBuf },
    Generated(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    SiemensStar { size: usize, sectors: usize },
    Chessboard { size: usize, tiles_per_side: usize },
    Uniform { size: usize, value: f64 },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Bitmap> {
        match *self {
            GeneratorSpec::SiemensStar { size, sectors } => pattern::siemens_star(size, sectors),
            GeneratorSpec::Chessboard {
                size,
                tiles_per_side,
            } => pattern::chessboard(size, tiles_per_side),
            GeneratorSpec::Uniform { size, value } => pattern::uniform(size, value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRangeSection {
    pub lo: [f64; 6],
    pub hi: [f64; 6],
}

impl Default for PoseRangeSection {
    fn default() -> Self {
        Self {
            lo: [-0.5, -0.5, -0.5, -2.0, -2.0, -2.0],
            hi: [0.5, 0.5, 0.5, 2.0, 2.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub trials: usize,
    /// Multiple of the two-render noise floor added to the percentile.
    pub margin: f64,
    pub percentile: f64,
    pub seed: u64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            trials: 10,
            margin: 0.5,
            percentile: 90.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub noise: f64,
    pub translation_scale: f64,
    pub sigma_dist: f64,
    pub action_bound: f64,
    pub max_steps: usize,
    pub reward: RewardMode,
    pub combined_radius: f64,
    pub active: [bool; 6],
    pub reference_samples: usize,
    pub reference_seed: u64,
    pub max_irradiance: f64,
    /// Calibrated thresholds keyed by noise label ("0", "0.25", "0.5").
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, f64>,
    pub pose_range: PoseRangeSection,
    pub calibration: CalibrationSection,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            noise: 0.0,
            translation_scale: 300.0,
            sigma_dist: 0.05,
            action_bound: 0.2,
            max_steps: 50,
            reward: RewardMode::Combined,
            combined_radius: 0.1,
            active: [true, true, true, true, true, false],
            reference_samples: 100,
            reference_seed: 1,
            max_irradiance: 1.0,
            thresholds: BTreeMap::new(),
            pose_range: PoseRangeSection::default(),
            calibration: CalibrationSection::default(),
        }
    }
}

pub fn noise_key(label: f64) -> String {
    format!("{label}")
}

impl EnvSection {
    pub fn threshold_for(&self, label: f64) -> Option<f64> {
        self.thresholds.get(&noise_key(label)).copied()
    }

    pub fn set_threshold(&mut self, label: f64, theta: f64) {
        self.thresholds.insert(noise_key(label), theta);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Volume,
    PerDim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub search_fraction: f64,
    pub search_mode: SearchMode,
    pub n_init: usize,
    pub candidates: usize,
    pub local_candidates: usize,
    pub n_trees: usize,
    pub jitter: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            search_fraction: 0.08,
            search_mode: SearchMode::Volume,
            n_init: 10,
            candidates: 1024,
            local_candidates: 64,
            n_trees: 50,
            jitter: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub algorithms: Vec<String>,
    pub noise_levels: Vec<f64>,
    pub episodes: usize,
    pub steps: usize,
    pub seed: u64,
    pub statistic: String,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            algorithms: vec!["random".into(), "bo-gp".into(), "bo-rf".into()],
            noise_levels: vec![0.0, 0.25, 0.5],
            episodes: 30,
            steps: 25,
            seed: 0,
            statistic: "median".into(),
        }
    }
}

impl SceneConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str::<SceneConfig>(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// The built-in default configuration.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CONFIG, Path::new("<builtin>")).expect("builtin config parses")
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn load_pattern(&self) -> Result<Bitmap> {
        match &self.emitter.pattern {
            PatternSource::Generated(spec) => spec.generate(),
            PatternSource::File { path } => {
                let full = match &self.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                pgm::read_bitmap_pgm(&full).map_err(|e| {
                    Error::config(format!("cannot load pattern {}: {e}", full.display()))
                })
            }
        }
    }

    pub fn build_system(&self) -> Result<LensSystem> {
        let pattern = Arc::new(self.load_pattern()?);
        LensSystem::new(
            self.lens.elements.clone(),
            self.lens.stop,
            self.sensor,
            Emitter {
                distance: self.emitter.distance_mm,
                width_mm: self.emitter.width_mm,
                height_mm: self.emitter.height_mm,
                pattern: Some(pattern),
            },
            self.lens.pivot_z,
        )
    }
}
