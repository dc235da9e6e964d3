use nalgebra::Matrix6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::pose::{ActiveMask, OPTIMAL_COORD};
use crate::optics::Perturbation;
use crate::{seed, Error, Result};

/// Per-lens placement error distribution of one benchmark setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel {
    pub label: f64,
    /// Translation standard deviation, mm.
    pub sigma_t: f64,
    /// Rotation standard deviation, degrees.
    pub sigma_r: f64,
}

/// Translation std at label 0.25, before the config scale factor.
pub const LOW_TRANSLATION_STD: f64 = 1.25e-4;
pub const HIGH_TRANSLATION_STD: f64 = 2.5e-4;
pub const LOW_ROTATION_STD: f64 = 0.375;
pub const HIGH_ROTATION_STD: f64 = 0.75;

impl NoiseLevel {
    /// Level for label 0, 0.25 or 0.5. Translation stds are multiplied by
    /// `translation_scale` to obtain millimeters.
    pub fn from_label(label: f64, translation_scale: f64) -> Result<Self> {
        if !(translation_scale > 0.0) {
            return Err(Error::config("translation_scale must be positive"));
        }
        let (t, r) = if label == 0.0 {
            (0.0, 0.0)
        } else if label == 0.25 {
            (LOW_TRANSLATION_STD, LOW_ROTATION_STD)
        } else if label == 0.5 {
            (HIGH_TRANSLATION_STD, HIGH_ROTATION_STD)
        } else {
            return Err(Error::config(format!(
                "unknown noise level {label}; expected 0, 0.25 or 0.5"
            )));
        };
        Ok(Self {
            label,
            sigma_t: t * translation_scale,
            sigma_r: r,
        })
    }

    pub fn none() -> Self {
        Self {
            label: 0.0,
            sigma_t: 0.0,
            sigma_r: 0.0,
        }
    }
}

/// Latent episode context: starting pose, movement distortion and per-lens
/// placement errors (dx, dy, dz in mm; rx, ry in degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceBundle {
    pub w_off: [f64; 6],
    pub w_dist: Matrix6<f64>,
    pub w_lens: Vec<[f64; 5]>,
}

impl VarianceBundle {
    /// No variances: ideal start pose, undistorted moves, perfect lenses.
    pub fn zero(n_elements: usize) -> Self {
        Self {
            w_off: [OPTIMAL_COORD; 6],
            w_dist: Matrix6::identity(),
            w_lens: vec![[0.0; 5]; n_elements],
        }
    }

    pub fn perturbations(&self) -> Vec<Perturbation> {
        self.w_lens
            .iter()
            .map(|r| Perturbation::from_array(*r))
            .collect()
    }

    /// Bit-exact serialized form (little-endian f64s).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.w_off
            .iter()
            .chain(self.w_dist.iter())
            .chain(self.w_lens.iter().flatten())
            .flat_map(|v| v.to_le_bytes())
            .collect()
    }
}

/// Parameters of the variance distribution for one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceModel {
    pub level: NoiseLevel,
    pub sigma_dist: f64,
    pub active: ActiveMask,
    pub n_elements: usize,
}

/// How many trailing elements receive placement errors.
pub const PERTURBED_ELEMENTS: usize = 2;

const VARIANCE_STREAM: u64 = 0;

/// Draws a variance bundle. The same seed yields the same standard-normal
/// draws at every noise level, so levels differ only in scale.
pub fn sample_variances(model: &VarianceModel, seed: u64) -> VarianceBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, VARIANCE_STREAM));
    let mut w_off = [0.0; 6];
    for (i, v) in w_off.iter_mut().enumerate() {
        let u: f64 = rng.random();
        *v = if model.active.0[i] { u } else { OPTIMAL_COORD };
    }
    let mut eps = Matrix6::zeros();
    for r in 0..6 {
        for c in 0..6 {
            let z: f64 = rng.sample(StandardNormal);
            if model.active.0[r] && model.active.0[c] {
                eps[(r, c)] = model.sigma_dist * z;
            }
        }
    }
    let mut w_lens = vec![[0.0; 5]; model.n_elements];
    let first = model.n_elements.saturating_sub(PERTURBED_ELEMENTS);
    for row in w_lens.iter_mut().skip(first) {
        for (k, v) in row.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            let sigma = if k < 3 {
                model.level.sigma_t
            } else {
                model.level.sigma_r
            };
            *v = sigma * z;
        }
    }
    VarianceBundle {
        w_off,
        w_dist: Matrix6::identity() + eps,
        w_lens,
    }
}
