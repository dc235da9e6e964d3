//! File formats: PGM images and the raw float sidecar.

pub mod pgm;
pub mod sidecar;
