use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::ObjectiveSample;
use crate::{stats, Error, Result};

/// Largest jitter tried before giving up on the factorization.
pub const MAX_JITTER: f64 = 1e-2;

/// Kernel hyperparameters; `None` selects the data-driven heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyper {
    pub lengthscale: Option<f64>,
    pub signal_variance: Option<f64>,
    /// Initial diagonal jitter (absolute).
    pub jitter: f64,
}

impl Default for GpHyper {
    fn default() -> Self {
        Self {
            lengthscale: None,
            signal_variance: None,
            jitter: 1e-8,
        }
    }
}

/// Exact GP regression with a Matérn-5/2 kernel and constant prior mean.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    /// Lower Cholesky factor of K + jitter·I.
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    prior_mean: f64,
    signal_variance: f64,
    lengthscale: f64,
    jitter: f64,
}

/// Matérn-5/2 correlation at distance `r` (unit variance).
pub fn matern52(r: f64, lengthscale: f64) -> f64 {
    let s = 5f64.sqrt() * r / lengthscale;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Median of all pairwise input distances; 1.0 when undefined or zero.
pub fn median_distance(inputs: &[Vec<f64>]) -> f64 {
    let mut d = Vec::with_capacity(inputs.len() * inputs.len().saturating_sub(1) / 2);
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            d.push(distance(&inputs[i], &inputs[j]));
        }
    }
    let m = stats::median(&d);
    if m.is_finite() && m > 0.0 {
        m
    } else {
        1.0
    }
}

pub fn gp_fit(samples: &[ObjectiveSample], hyper: &GpHyper) -> Result<GpModel> {
    if samples.is_empty() {
        return Err(Error::invalid("gp_fit needs at least one sample"));
    }
    let dims = samples[0].proposal.len();
    if samples.iter().any(|s| {
        s.proposal.len() != dims
            || !s.score.is_finite()
            || s.proposal.iter().any(|v| !v.is_finite())
    }) {
        return Err(Error::invalid(
            "gp_fit samples must be finite and share one dimension",
        ));
    }
    let inputs: Vec<Vec<f64>> = samples.iter().map(|s| s.proposal.clone()).collect();
    let targets: Vec<f64> = samples.iter().map(|s| s.score).collect();
    let prior_mean = stats::mean(&targets);
    let signal_variance = hyper.signal_variance.unwrap_or_else(|| {
        let v = stats::std_dev(&targets).powi(2);
        if v < 1e-12 {
            1.0
        } else {
            v
        }
    });
    let lengthscale = hyper
        .lengthscale
        .unwrap_or_else(|| median_distance(&inputs));
    if !(lengthscale > 0.0 && signal_variance > 0.0 && hyper.jitter > 0.0) {
        return Err(Error::invalid("GP hyperparameters must be positive"));
    }

    let n = inputs.len();
    let kernel = DMatrix::from_fn(n, n, |i, j| {
        signal_variance * matern52(distance(&inputs[i], &inputs[j]), lengthscale)
    });
    let centered = DVector::from_iterator(n, targets.iter().map(|y| y - prior_mean));

    let (chol, jitter) = factorize(&kernel, hyper.jitter)?;
    let alpha = chol.solve(&centered);
    Ok(GpModel {
        inputs,
        chol_l: chol.unpack(),
        alpha,
        prior_mean,
        signal_variance,
        lengthscale,
        jitter,
    })
}

/// Cholesky of `kernel + jitter·I`, raising the jitter tenfold on failure
/// until [`MAX_JITTER`]. Returns the factor and the jitter used.
fn factorize(kernel: &DMatrix<f64>, initial_jitter: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = initial_jitter;
    loop {
        let mut k = kernel.clone();
        for i in 0..k.nrows() {
            k[(i, i)] += jitter;
        }
        if let Some(chol) = k.cholesky() {
            return Ok((chol, jitter));
        }
        if jitter * 10.0 > MAX_JITTER * (1.0 + 1e-9) {
            return Err(Error::Factorization(jitter));
        }
        jitter *= 10.0;
    }
}

impl GpModel {
    /// Posterior mean and variance (clamped at zero).
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let k = DVector::from_iterator(
            self.inputs.len(),
            self.inputs
                .iter()
                .map(|xi| self.signal_variance * matern52(distance(xi, x), self.lengthscale)),
        );
        let mean = self.prior_mean + k.dot(&self.alpha);
        let v = self
            .chol_l
            .solve_lower_triangular(&k)
            .expect("cholesky factor has a positive diagonal");
        let var = (self.signal_variance - v.norm_squared()).max(0.0);
        (mean, var)
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Jitter actually used by the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }
}

pub fn gp_predict(model: &GpModel, x: &[f64]) -> (f64, f64) {
    model.predict(x)
}
