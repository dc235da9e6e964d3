#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::pose::Pose;
use super::EnvConfig;
use crate::optics::{render, RenderParams};
use crate::{rmse, seed, Error, Result, SensorImage};

/// Pixel-wise mean of `n_samples` renders of the ideal system at the ideal
/// pose, each with its own sub-seed.
pub fn build_reference(config: &EnvConfig, n_samples: usize, seed: u64) -> Result<SensorImage> {
    if n_samples == 0 {
        return Err(Error::invalid("reference needs at least one sample"));
    }
    let system = config
        .system
        .apply_pose(&config.pose_range.to_physical(&Pose::optimal()));
    let one = |i: usize| {
        render(
            &system,
            &RenderParams {
                seed: seed::derive(seed, i as u64),
                ..config.render
            },
        )
    };
    // renders are parallel inside; summing in index order keeps the result
    // independent of scheduling
    let mut acc: Option<SensorImage> = None;
    for i in 0..n_samples {
        let img = one(i)?;
        match acc.as_mut() {
            None => acc = Some(img),
            Some(a) => {
                for (x, v) in a.data_mut().iter_mut().zip(img.data()) {
                    *x += v;
                }
            }
        }
    }
    let mut mean = acc.expect("n_samples >= 1");
    let n = n_samples as f64;
    #[cfg(feature = "parallel")]
    mean.data_mut().par_iter_mut().for_each(|x| *x /= n);
    #[cfg(not(feature = "parallel"))]
    mean.data_mut().iter_mut().for_each(|x| *x /= n);
    Ok(mean)
}

/// RMSE between two independent renders at the ideal pose of the ideal
/// system: the sensor-noise floor of the pattern distance.
pub fn noise_floor(config: &EnvConfig, seed: u64) -> Result<f64> {
    let system = config
        .system
        .apply_pose(&config.pose_range.to_physical(&Pose::optimal()));
    let a = render(
        &system,
        &RenderParams {
            seed: seed::derive(seed, 0),
            ..config.render
        },
    )?;
    let b = render(
        &system,
        &RenderParams {
            seed: seed::derive(seed, 1),
            ..config.render
        },
    )?;
    rmse(&a, &b)
}
