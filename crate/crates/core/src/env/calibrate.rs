use super::pose::Pose;
use super::reference::noise_floor;
use super::variance::{sample_variances, NoiseLevel};
use super::EnvConfig;
use crate::optics::{render, RenderParams};
use crate::{rmse, seed, stats, Error, Result, SensorImage};

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub threshold: f64,
    pub noise_floor: f64,
    /// Best reachable score per trial.
    pub best_scores: Vec<f64>,
}

const STEP_SIZES: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
const MAX_PASSES: usize = 3;

/// Derives the termination threshold for `level`.
///
/// For each trial a variance bundle is drawn and an oracle coordinate
/// descent, started at the ideal pose and allowed to set poses directly,
/// searches for the best reachable RMSE. The threshold is the configured
/// percentile of those scores plus `margin` times the level-0 noise floor.
pub fn calibrate_threshold(
    config: &EnvConfig,
    reference: &SensorImage,
    level: NoiseLevel,
    trials: usize,
    percentile: f64,
    margin: f64,
    seed: u64,
) -> Result<Calibration> {
    if trials < 5 {
        return Err(Error::invalid("calibration needs at least 5 trials"));
    }
    let floor = noise_floor(config, seed::derive(seed, u64::MAX))?;
    let model = config.with_noise(level).variance_model();
    let mut best_scores = Vec::with_capacity(trials);
    for t in 0..trials {
        let trial_seed = seed::derive(seed, t as u64);
        let variances = sample_variances(&model, trial_seed);
        let perturbed = config.perturbed_system(&variances)?;
        let params = RenderParams {
            seed: seed::derive(trial_seed, 1),
            ..config.render
        };
        let score = |coords: &[f64; 6]| -> Result<f64> {
            let pose = Pose::clipped(*coords);
            let img = render(&config.posed_system(&perturbed, &pose), &params)?;
            rmse(&img, reference)
        };
        let mut x = *Pose::optimal().coords();
        let mut best = score(&x)?;
        for h in STEP_SIZES {
            for _ in 0..MAX_PASSES {
                let mut improved = false;
                for i in config.active.indices() {
                    for dir in [1.0, -1.0] {
                        let mut cand = x;
                        cand[i] = (cand[i] + dir * h).clamp(0.0, 1.0);
                        if cand[i] == x[i] {
                            continue;
                        }
                        let s = score(&cand)?;
                        if s < best {
                            best = s;
                            x = cand;
                            improved = true;
                            break;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        log::debug!("calibration trial {t}: best score {best:.6}");
        best_scores.push(best);
    }
    let threshold = stats::percentile(&best_scores, percentile) + margin * floor;
    Ok(Calibration {
        threshold,
        noise_floor: floor,
        best_scores,
    })
}
