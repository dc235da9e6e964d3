use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::acquisition::expected_improvement;
use super::search::{random_propose, SearchBox};
use super::ObjectiveSample;

/// Candidate-set settings for one acquisition step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionSettings {
    /// Uniform candidates over the box.
    pub candidates: usize,
    /// Gaussian perturbations of the incumbent.
    pub local_candidates: usize,
    /// Std of the incumbent perturbations as a fraction of each box side.
    pub local_scale: f64,
}

impl Default for AcquisitionSettings {
    fn default() -> Self {
        Self {
            candidates: 1024,
            local_candidates: 64,
            local_scale: 0.1,
        }
    }
}

/// Picks the next proposal by maximizing expected improvement of
/// `predict` over a random candidate set. Falls back to the candidate with
/// the largest predicted variance when no candidate has positive EI.
pub fn bo_step<R, F>(
    predict: F,
    history: &[ObjectiveSample],
    search: &SearchBox,
    settings: &AcquisitionSettings,
    rng: &mut R,
) -> Vec<f64>
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> (f64, f64),
{
    let incumbent = history.iter().min_by(|a, b| a.score.total_cmp(&b.score));
    let mut candidates: Vec<Vec<f64>> = (0..settings.candidates)
        .map(|_| random_propose(search, rng))
        .collect();
    if let Some(best) = incumbent {
        for _ in 0..settings.local_candidates {
            let mut x: Vec<f64> = best
                .proposal
                .iter()
                .enumerate()
                .map(|(d, v)| {
                    let z: f64 = StandardNormal.sample(rng);
                    v + z * settings.local_scale * search.width(d)
                })
                .collect();
            search.clamp(&mut x);
            candidates.push(x);
        }
    }
    if candidates.is_empty() {
        return random_propose(search, rng);
    }
    let best_score = incumbent.map_or(f64::INFINITY, |s| s.score);
    let scored: Vec<(f64, f64)> = candidates
        .iter()
        .map(|x| {
            let (m, v) = predict(x);
            (expected_improvement(m, v, best_score), v)
        })
        .collect();
    let argmax = |key: fn(&(f64, f64)) -> f64| {
        scored
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                if key(s) > acc.1 {
                    (i, key(s))
                } else {
                    acc
                }
            })
    };
    let (i_ei, max_ei) = argmax(|s| s.0);
    let pick = if max_ei > 0.0 {
        i_ei
    } else {
        argmax(|s| s.1).0
    };
    candidates.swap_remove(pick)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn falls_back_to_max_variance() {
        let search = SearchBox::unit(1);
        let history = [ObjectiveSample {
            proposal: vec![0.5],
            score: 0.0,
        }];
        // mean far above the best everywhere, zero variance except near 0.9
        let predict = |x: &[f64]| {
            (
                10.0,
                if (x[0] - 0.9).abs() < 0.05 {
                    1e-30
                } else {
                    0.0
                },
            )
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = bo_step(
            predict,
            &history,
            &search,
            &AcquisitionSettings::default(),
            &mut rng,
        );
        assert!((x[0] - 0.9).abs() < 0.05);
    }

    #[test]
    fn proposals_stay_in_box() {
        let search = SearchBox::new(vec![0.2, 0.3], vec![0.4, 0.9]).unwrap();
        let history = [ObjectiveSample {
            proposal: vec![0.4, 0.9],
            score: 0.1,
        }];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = bo_step(
                |x: &[f64]| (x[0] + x[1], 0.01),
                &history,
                &search,
                &AcquisitionSettings::default(),
                &mut rng,
            );
            assert!(search.contains(&x));
        }
    }
}
