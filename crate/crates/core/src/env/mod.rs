//! The episodic alignment environment.
//!
//! A state is a normalized pose in `[0, 1]^6` plus a latent
//! [`VarianceBundle`] fixed for the episode. Only rendered sensor images are
//! observable; scores are RMSE distances to a reference image rendered at
//! the ideal pose of the ideal system.

mod calibrate;
mod landscape;
mod pose;
mod reference;
mod reward;
mod variance;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate_threshold, Calibration};
pub use landscape::{argmin, landscape_slice};
pub use pose::{ActiveMask, Pose, PoseRangeMap, AXIS_NAMES, OPTIMAL_COORD};
pub use reference::{build_reference, noise_floor};
pub use reward::reward;
pub use variance::{sample_variances, NoiseLevel, VarianceBundle, VarianceModel};

use crate::config::SceneConfig;
use crate::optics::{render, LensSystem, RenderParams};
use crate::{rmse, seed, Error, Result, SensorImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Dist,
    Pattern,
    Combined,
}

/// Everything needed to run episodes of one benchmark setting.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    /// Nominal lens system (no pose, no placement errors).
    pub system: Arc<LensSystem>,
    pub pose_range: PoseRangeMap,
    pub noise: NoiseLevel,
    pub sigma_dist: f64,
    /// Largest admissible |action| per coordinate, normalized units.
    pub action_bound: f64,
    /// Termination threshold on RMSE to the reference.
    pub threshold: f64,
    pub max_steps: usize,
    pub reward_mode: RewardMode,
    pub combined_radius: f64,
    pub render: RenderParams,
    pub active: ActiveMask,
}

impl EnvConfig {
    /// Builds the environment config from a scene file. The threshold is
    /// taken from the calibrated table when present, else infinity is used
    /// until one is calibrated or supplied.
    pub fn from_scene(scene: &SceneConfig) -> Result<Self> {
        let env = &scene.env;
        let noise = NoiseLevel::from_label(env.noise, env.translation_scale)?;
        let cfg = Self {
            system: Arc::new(scene.build_system()?),
            pose_range: PoseRangeMap::new(env.pose_range.lo, env.pose_range.hi)?,
            noise,
            sigma_dist: env.sigma_dist,
            action_bound: env.action_bound,
            threshold: env.threshold_for(env.noise).unwrap_or(f64::INFINITY),
            max_steps: env.max_steps,
            reward_mode: env.reward,
            combined_radius: env.combined_radius,
            render: scene.render,
            active: ActiveMask(env.active),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::config("threshold must be positive"));
        }
        if self.max_steps < 1 {
            return Err(Error::config("max_steps must be at least 1"));
        }
        if !(self.action_bound > 0.0 && self.action_bound <= 1.0) {
            return Err(Error::config("action_bound must lie in (0, 1]"));
        }
        if !(self.combined_radius > 0.0) {
            return Err(Error::config("combined_radius must be positive"));
        }
        if !(self.sigma_dist >= 0.0) {
            return Err(Error::config("sigma_dist must be nonnegative"));
        }
        if self.active.count() == 0 {
            return Err(Error::config("at least one pose dimension must be active"));
        }
        Ok(())
    }

    pub fn with_noise(&self, noise: NoiseLevel) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self {
            threshold,
            ..self.clone()
        }
    }

    pub fn variance_model(&self) -> VarianceModel {
        VarianceModel {
            level: self.noise,
            sigma_dist: self.sigma_dist,
            active: self.active,
            n_elements: self.system.elements.len(),
        }
    }

    /// Lens system with the bundle's placement errors applied and the stack
    /// moved to `pose`.
    pub fn posed_system(&self, perturbed: &LensSystem, pose: &Pose) -> LensSystem {
        perturbed.apply_pose(&self.pose_range.to_physical(pose))
    }

    pub fn perturbed_system(&self, variances: &VarianceBundle) -> Result<LensSystem> {
        self.system.with_perturbations(&variances.perturbations())
    }

    /// Renders the observation at `pose` under `variances` with the given
    /// render seed.
    pub fn observe(
        &self,
        variances: &VarianceBundle,
        pose: &Pose,
        render_seed: u64,
    ) -> Result<SensorImage> {
        let perturbed = self.perturbed_system(variances)?;
        render(
            &self.posed_system(&perturbed, pose),
            &RenderParams {
                seed: render_seed,
                ..self.render
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub pose: Pose,
    pub variances: VarianceBundle,
    pub step_count: usize,
    /// RMSE of the latest observation against the reference.
    pub last_score: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: EnvState,
    pub observation: SensorImage,
    pub reward: f64,
    pub score: f64,
    pub terminated: bool,
    pub truncated: bool,
}

const RENDER_STREAM: u64 = 1;

/// One environment instance running a single episode at a time.
#[derive(Debug, Clone)]
pub struct AlignEnv {
    config: EnvConfig,
    reference: Arc<SensorImage>,
    episode: Option<Episode>,
}

#[derive(Debug, Clone)]
struct Episode {
    state: EnvState,
    perturbed: LensSystem,
    seed: u64,
    done: bool,
}

impl AlignEnv {
    pub fn new(config: EnvConfig, reference: Arc<SensorImage>) -> Result<Self> {
        config.validate()?;
        let s = &config.system.sensor;
        if reference.width() != s.width_px || reference.height() != s.height_px {
            return Err(Error::DimensionMismatch(
                reference.width(),
                reference.height(),
                s.width_px,
                s.height_px,
            ));
        }
        Ok(Self {
            config,
            reference,
            episode: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn reference(&self) -> &SensorImage {
        &self.reference
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.episode.as_ref().map(|e| &e.state)
    }

    /// Starts an episode with freshly sampled variances.
    pub fn reset(&mut self, seed: u64) -> Result<(EnvState, SensorImage)> {
        let variances = sample_variances(&self.config.variance_model(), seed);
        self.reset_with(variances, seed)
    }

    /// Starts an episode with the given variances; the pose starts at
    /// `w_off`.
    pub fn reset_with(
        &mut self,
        variances: VarianceBundle,
        seed: u64,
    ) -> Result<(EnvState, SensorImage)> {
        let perturbed = self.config.perturbed_system(&variances)?;
        let pose = Pose::new(variances.w_off)?;
        let observation = self.render_at(&perturbed, &pose, seed, 0)?;
        let score = rmse(&observation, &self.reference)?;
        let state = EnvState {
            pose,
            variances,
            step_count: 0,
            last_score: score,
        };
        self.episode = Some(Episode {
            state: state.clone(),
            perturbed,
            seed,
            done: false,
        });
        Ok((state, observation))
    }

    fn render_at(
        &self,
        perturbed: &LensSystem,
        pose: &Pose,
        seed: u64,
        step: usize,
    ) -> Result<SensorImage> {
        let params = RenderParams {
            seed: seed::derive_path(seed, &[RENDER_STREAM, step as u64]),
            ..self.config.render
        };
        render(&self.config.posed_system(perturbed, pose), &params)
    }

    /// Applies `action` (normalized units, one entry per pose coordinate).
    /// Inactive coordinates are forced to zero; active ones must lie within
    /// the action bound.
    pub fn step(&mut self, action: &[f64; 6]) -> Result<StepOutcome> {
        let bound = self.config.action_bound;
        let active = self.config.active;
        let mut a = *action;
        for (i, v) in a.iter_mut().enumerate() {
            if !active.0[i] {
                *v = 0.0;
            } else if !(v.abs() <= bound + 1e-12) {
                return Err(Error::ActionOutOfBounds {
                    index: i,
                    value: *v,
                    bound,
                });
            }
        }
        let episode = self.episode.as_ref().ok_or(Error::EpisodeFinished)?;
        if episode.done {
            return Err(Error::EpisodeFinished);
        }
        let state = &episode.state;
        let pose = state.pose.moved(&state.variances.w_dist, &a);
        let step = state.step_count + 1;
        let observation = self.render_at(&episode.perturbed, &pose, episode.seed, step)?;
        let score = rmse(&observation, &self.reference)?;
        let r = reward(
            &pose,
            &observation,
            &self.reference,
            self.config.reward_mode,
            self.config.combined_radius,
            &active,
        )?;
        let terminated = score <= self.config.threshold;
        let truncated = step >= self.config.max_steps;
        let episode = self.episode.as_mut().expect("episode present");
        episode.state.pose = pose;
        episode.state.step_count = step;
        episode.state.last_score = score;
        episode.done = terminated || truncated;
        Ok(StepOutcome {
            state: episode.state.clone(),
            observation,
            reward: r,
            score,
            terminated,
            truncated,
        })
    }
}
