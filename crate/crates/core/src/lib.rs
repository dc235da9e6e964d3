//! Simulation and benchmarking of active optical alignment.
//!
//! A Monte Carlo backward ray tracer renders sensor images of an emitter
//! pattern through a (possibly misaligned) four-element lens stack. Those
//! images are the observations of an episodic alignment environment, and a
//! set of black-box optimizers (random search, Bayesian optimization with
//! Gaussian-process or random-forest surrogates) are benchmarked on it.
//!
//! Rendering is data-parallel over sensor rows when the `parallel` feature
//! (default) is enabled; the sequential path produces bit-identical images.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod env;
mod error;
pub mod image;
pub mod io;
pub mod opt;
pub mod optics;
pub mod pattern;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use image::{rmse, SensorImage};
pub use pattern::Bitmap;
