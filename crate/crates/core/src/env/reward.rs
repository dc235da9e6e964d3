use super::pose::{ActiveMask, Pose};
use super::RewardMode;
use crate::{rmse, Result, SensorImage};

/// Reward of reaching `pose` with `observation`.
///
/// `Dist` is the negated distance to the ideal pose over active dimensions,
/// `Pattern` the negated RMSE to the reference. `Combined` adds the distance
/// term only inside the radius `combined_radius` around the ideal pose.
pub fn reward(
    pose: &Pose,
    observation: &SensorImage,
    reference: &SensorImage,
    mode: RewardMode,
    combined_radius: f64,
    active: &ActiveMask,
) -> Result<f64> {
    let pattern = -rmse(observation, reference)?;
    let dist = -pose.distance_to_optimal(active);
    Ok(match mode {
        RewardMode::Dist => dist,
        RewardMode::Pattern => pattern,
        RewardMode::Combined if -dist <= combined_radius => pattern + dist,
        RewardMode::Combined => pattern,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn images() -> (SensorImage, SensorImage) {
        (
            SensorImage::from_data(2, 2, vec![0.2, 0.4, 0.0, 1.0]).unwrap(),
            SensorImage::from_data(2, 2, vec![0.1, 0.5, 0.0, 0.8]).unwrap(),
        )
    }

    #[test]
    fn dist_zero_at_optimum() {
        let (o, r) = images();
        let v = reward(
            &Pose::optimal(),
            &o,
            &r,
            RewardMode::Dist,
            0.1,
            &ActiveMask::default(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn combined_far_equals_pattern() {
        let (o, r) = images();
        let pose = Pose::new([1.0, 0.5, 0.5, 0.5, 0.5, 0.5]).unwrap();
        let m = ActiveMask::default();
        assert_eq!(pose.distance_to_optimal(&m), 0.5);
        let c = reward(&pose, &o, &r, RewardMode::Combined, 0.1, &m).unwrap();
        let p = reward(&pose, &o, &r, RewardMode::Pattern, 0.1, &m).unwrap();
        assert_eq!(c, p);
    }

    #[test]
    fn rejects_mismatched_reference() {
        let (o, _) = images();
        let r = SensorImage::zeros(3, 3);
        assert!(reward(
            &Pose::optimal(),
            &o,
            &r,
            RewardMode::Pattern,
            0.1,
            &ActiveMask::default()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn combined_consistency(coords in prop::array::uniform6(0.0f64..=1.0), c in 0.01f64..1.0) {
            let (o, r) = images();
            let pose = Pose::new(coords).unwrap();
            let m = ActiveMask::default();
            let comb = reward(&pose, &o, &r, RewardMode::Combined, c, &m).unwrap();
            let pat = reward(&pose, &o, &r, RewardMode::Pattern, c, &m).unwrap();
            let dist = reward(&pose, &o, &r, RewardMode::Dist, c, &m).unwrap();
            if pose.distance_to_optimal(&m) <= c {
                prop_assert!((comb - (pat + dist)).abs() < 1e-12);
            } else {
                prop_assert_eq!(comb, pat);
            }
            prop_assert!(comb <= 0.0 && pat <= 0.0 && dist <= 0.0);
        }
    }
}
