use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Expected improvement below `best` of a normal belief with the given
/// mean and variance (minimization).
pub fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let improvement = best - mean;
    let sigma = variance.max(0.0).sqrt();
    if sigma == 0.0 {
        return improvement.max(0.0);
    }
    let z = improvement / sigma;
    (improvement * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}
