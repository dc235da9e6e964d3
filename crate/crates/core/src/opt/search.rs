use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::SearchMode;
use crate::{Error, Result};

/// Axis-aligned proposal region over the active pose coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid(
                "search box bounds must be non-empty and equal length",
            ));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(0.0 <= *l && l < h && *h <= 1.0) {
                return Err(Error::invalid(format!(
                    "search box side [{l}, {h}] must satisfy 0 <= lo < hi <= 1"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Box centered at 0.5 covering `fraction` of the unit cube, either by
    /// volume or per side.
    pub fn centered(dims: usize, fraction: f64, mode: SearchMode) -> Result<Self> {
        if dims == 0 || !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "search fraction {fraction} must lie in (0, 1] for {dims} dims"
            )));
        }
        let width = match mode {
            SearchMode::Volume => fraction.powf(1.0 / dims as f64),
            SearchMode::PerDim => fraction,
        };
        Self::new(vec![0.5 - width / 2.0; dims], vec![0.5 + width / 2.0; dims])
    }

    pub fn unit(dims: usize) -> Self {
        Self {
            lo: vec![0.0; dims],
            hi: vec![1.0; dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, d: usize) -> f64 {
        self.hi[d] - self.lo[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| l <= v && v <= h)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    /// Maps a point of the unit cube into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(d, v)| self.lo[d] + v * self.width(d))
            .collect()
    }
}

/// Uniform sample within the box.
pub fn random_propose<R: Rng + ?Sized>(search: &SearchBox, rng: &mut R) -> Vec<f64> {
    (0..search.dims())
        .map(|d| search.lo[d] + rng.random::<f64>() * search.width(d))
        .collect()
}

/// Latin hypercube design of `n` points: every dimension has exactly one
/// point in each of its `n` equal strata.
pub fn latin_hypercube<R: Rng + ?Sized>(
    search: &SearchBox,
    n: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut columns: Vec<Vec<f64>> = (0..search.dims())
        .map(|_| {
            let mut strata: Vec<usize> = (0..n).collect();
            strata.shuffle(rng);
            strata
                .into_iter()
                .map(|s| (s as f64 + rng.random::<f64>()) / n as f64)
                .collect()
        })
        .collect();
    (0..n)
        .map(|i| {
            let u: Vec<f64> = columns.iter_mut().map(|c| c[i]).collect();
            search.from_unit(&u)
        })
        .collect()
}
