use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::optics::PhysicalPose;
use crate::{Error, Result};

/// Normalized coordinate of the ideal pose in every dimension.
pub const OPTIMAL_COORD: f64 = 0.5;

/// Normalized stack pose (x, y, z, Rx, Ry, Rz), each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose([f64; 6]);

impl Pose {
    pub fn new(coords: [f64; 6]) -> Result<Self> {
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid(format!(
                "pose {coords:?} leaves the unit cube"
            )));
        }
        Ok(Self(coords))
    }

    /// Builds a pose, clipping every coordinate into [0, 1].
    pub fn clipped(coords: [f64; 6]) -> Self {
        Self(coords.map(|c| {
            if c.is_nan() {
                OPTIMAL_COORD
            } else {
                c.clamp(0.0, 1.0)
            }
        }))
    }

    pub fn optimal() -> Self {
        Self([OPTIMAL_COORD; 6])
    }

    pub fn coords(&self) -> &[f64; 6] {
        &self.0
    }

    /// `clip(self + w_dist · action)`.
    pub fn moved(&self, w_dist: &Matrix6<f64>, action: &[f64; 6]) -> Self {
        let delta = w_dist * Vector6::from_column_slice(action);
        let mut next = self.0;
        for (c, d) in next.iter_mut().zip(delta.iter()) {
            *c += d;
        }
        Self::clipped(next)
    }

    /// Euclidean distance to the ideal pose over the active dimensions.
    pub fn distance_to_optimal(&self, active: &ActiveMask) -> f64 {
        active
            .indices()
            .map(|i| (self.0[i] - OPTIMAL_COORD).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Which pose dimensions the alignment may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveMask(pub [bool; 6]);

impl Default for ActiveMask {
    fn default() -> Self {
        Self([true, true, true, true, true, false])
    }
}

impl ActiveMask {
    pub fn all() -> Self {
        Self([true; 6])
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..6).filter(|&i| self.0[i])
    }

    /// Active coordinates of a full pose vector.
    pub fn project(&self, full: &[f64; 6]) -> Vec<f64> {
        self.indices().map(|i| full[i]).collect()
    }

    /// Full pose vector from active coordinates, inactive ones at `fill`.
    pub fn embed(&self, active: &[f64], fill: f64) -> [f64; 6] {
        let mut full = [fill; 6];
        for (i, v) in self.indices().zip(active) {
            full[i] = *v;
        }
        full
    }
}

pub const AXIS_NAMES: [&str; 6] = ["x", "y", "z", "rx", "ry", "rz"];

/// Per-axis physical bounds of the normalized cube: millimeters for the
/// translations, degrees for the rotations. 0.5 maps to the nominal pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRangeMap {
    lo: [f64; 6],
    hi: [f64; 6],
}

impl Default for PoseRangeMap {
    fn default() -> Self {
        Self::new(
            [-0.5, -0.5, -0.5, -2.0, -2.0, -2.0],
            [0.5, 0.5, 0.5, 2.0, 2.0, 2.0],
        )
        .expect("default range is valid")
    }
}

impl PoseRangeMap {
    pub fn new(lo: [f64; 6], hi: [f64; 6]) -> Result<Self> {
        for i in 0..6 {
            if !(lo[i] < hi[i]) {
                return Err(Error::config(format!(
                    "pose range axis {i}: lo must be below hi"
                )));
            }
            if (lo[i] + hi[i]).abs() > 1e-12 * (hi[i] - lo[i]) {
                return Err(Error::config(format!(
                    "pose range axis {i} must be centered on the nominal pose"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn to_physical(&self, pose: &Pose) -> PhysicalPose {
        std::array::from_fn(|i| self.lo[i] + pose.0[i] * (self.hi[i] - self.lo[i]))
    }
}
