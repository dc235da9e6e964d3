use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::Ray;
use super::system::LensSystem;
use super::trace::TraceScene;
use crate::pattern::Bitmap;
use crate::{seed, Error, Result, SensorImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderParams {
    pub samples_per_pixel: u32,
    pub seed: u64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            samples_per_pixel: 64,
            seed: 0,
        }
    }
}

struct Renderer<'a> {
    scene: TraceScene,
    pattern: &'a Bitmap,
    width: usize,
    height: usize,
    pixel_w: f64,
    pixel_h: f64,
    sensor_w: f64,
    sensor_h: f64,
    emitter_w: f64,
    emitter_h: f64,
    spp: u32,
    rng: ChaCha8Rng,
}

impl<'a> Renderer<'a> {
    fn new(system: &'a LensSystem, params: &RenderParams) -> Result<Self> {
        let sensor = &system.sensor;
        if sensor.width_px == 0
            || sensor.height_px == 0
            || !(sensor.width_mm > 0.0)
            || !(sensor.height_mm > 0.0)
        {
            return Err(Error::invalid("sensor has zero size"));
        }
        if params.samples_per_pixel == 0 {
            return Err(Error::invalid("samples_per_pixel must be at least 1"));
        }
        let pattern = system
            .emitter
            .pattern
            .as_deref()
            .ok_or_else(|| Error::invalid("emitter has no bitmap pattern"))?;
        if !(system.emitter.width_mm > 0.0) || !(system.emitter.height_mm > 0.0) {
            return Err(Error::invalid("emitter has zero extent"));
        }
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&seed::derive(params.seed, i as u64).to_le_bytes());
        }
        Ok(Self {
            scene: TraceScene::new(system),
            pattern,
            width: sensor.width_px,
            height: sensor.height_px,
            pixel_w: sensor.width_mm / sensor.width_px as f64,
            pixel_h: sensor.height_mm / sensor.height_px as f64,
            sensor_w: sensor.width_mm,
            sensor_h: sensor.height_mm,
            emitter_w: system.emitter.width_mm,
            emitter_h: system.emitter.height_mm,
            spp: params.samples_per_pixel,
            rng: ChaCha8Rng::from_seed(key),
        })
    }

    /// Monte Carlo estimate for one pixel from its own random stream.
    #[inline]
    fn pixel(&self, col: usize, row: usize) -> f64 {
        let mut rng = self.rng.clone();
        rng.set_stream((row * self.width + col) as u64);
        let sensor_z = self.scene.sensor_z();
        let aperture = self.scene.aperture_radius();
        let mut acc = 0.0;
        for _ in 0..self.spp {
            let jx: f64 = rng.random();
            let jy: f64 = rng.random();
            let origin = Point3::new(
                (col as f64 + jx) * self.pixel_w - 0.5 * self.sensor_w,
                0.5 * self.sensor_h - (row as f64 + jy) * self.pixel_h,
                sensor_z,
            );
            let direction = if aperture > 0.0 {
                let (ax, ay) = unit_disk(&mut rng);
                self.scene.aperture_point(aperture * ax, aperture * ay) - origin
            } else {
                -Vector3::z()
            };
            let ray = Ray::new(origin, direction);
            if let Some(traced) = self.scene.trace_backward(&ray) {
                let u = (traced.hit.x / self.emitter_w + 0.5) * self.pattern.width() as f64;
                let v = (0.5 - traced.hit.y / self.emitter_h) * self.pattern.height() as f64;
                acc += self.pattern.sample_bilinear(u, v);
            }
        }
        acc / self.spp as f64
    }

    fn render_row(&self, row: usize, out: &mut [f64]) {
        for (col, px) in out.iter_mut().enumerate() {
            *px = self.pixel(col, row);
        }
    }
}

/// Uniform point on the unit disk by rejection from the enclosing square.
#[inline]
fn unit_disk(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        if x * x + y * y <= 1.0 {
            return (x, y);
        }
    }
}

/// Renders on the calling thread only.
pub fn render_sequential(system: &LensSystem, params: &RenderParams) -> Result<SensorImage> {
    let renderer = Renderer::new(system, params)?;
    let mut image = SensorImage::zeros(renderer.width, renderer.height);
    image
        .data_mut()
        .chunks_mut(renderer.width)
        .enumerate()
        .for_each(|(row, out)| renderer.render_row(row, out));
    Ok(image)
}

/// Renders rows in parallel on the rayon pool. Output is bit-identical to
/// [`render_sequential`].
#[cfg(feature = "parallel")]
pub fn render_parallel(system: &LensSystem, params: &RenderParams) -> Result<SensorImage> {
    let renderer = Renderer::new(system, params)?;
    let mut image = SensorImage::zeros(renderer.width, renderer.height);
    image
        .data_mut()
        .par_chunks_mut(renderer.width)
        .enumerate()
        .for_each(|(row, out)| renderer.render_row(row, out));
    Ok(image)
}

/// Monte Carlo sensor image: each pixel averages `samples_per_pixel`
/// backward-traced rays from jittered positions toward the rear aperture.
/// Blocked rays count as 0, emitter hits as the bilinear bitmap value.
pub fn render(system: &LensSystem, params: &RenderParams) -> Result<SensorImage> {
    #[cfg(feature = "parallel")]
    {
        render_parallel(system, params)
    }
    #[cfg(not(feature = "parallel"))]
    {
        render_sequential(system, params)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::optics::system::tests::singlet_system;
    use crate::pattern;

    fn white_singlet(px: usize) -> LensSystem {
        let mut s = singlet_system().with_pattern(Arc::new(pattern::uniform(16, 1.0).unwrap()));
        s.sensor.width_px = px;
        s.sensor.height_px = px;
        s
    }

    #[test]
    fn uniform_emitter_positive() {
        let s = white_singlet(8);
        let img = render(
            &s,
            &RenderParams {
                samples_per_pixel: 16,
                seed: 3,
            },
        )
        .unwrap();
        let scene = TraceScene::new(&s);
        for row in 0..8 {
            for col in 0..8 {
                let x = (col as f64 + 0.5) * 2.0 / 8.0 - 1.0;
                let y = 1.0 - (row as f64 + 0.5) * 2.0 / 8.0;
                let origin = Point3::new(x, y, s.sensor_z());
                let chief = Ray::new(origin, scene.aperture_point(0.0, 0.0) - origin);
                if scene.trace_backward(&chief).is_some() {
                    assert!(img.get(col, row) > 0.0);
                }
            }
        }
        assert!(img.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn deterministic() {
        let s = white_singlet(6);
        let p = RenderParams {
            samples_per_pixel: 8,
            seed: 42,
        };
        assert_eq!(render(&s, &p).unwrap(), render(&s, &p).unwrap());
        let other = render(&s, &RenderParams { seed: 43, ..p }).unwrap();
        assert_ne!(render(&s, &p).unwrap(), other);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        let s = white_singlet(12).apply_pose(&[0.1, 0.0, 0.0, 0.5, 0.0, 0.0]);
        let p = RenderParams {
            samples_per_pixel: 4,
            seed: 9,
        };
        assert_eq!(
            render_parallel(&s, &p).unwrap(),
            render_sequential(&s, &p).unwrap()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = singlet_system();
        assert!(render(&s, &RenderParams::default()).is_err());
        let mut s = white_singlet(4);
        s.sensor.width_px = 0;
        assert!(render(&s, &RenderParams::default()).is_err());
        let s = white_singlet(4);
        assert!(render(
            &s,
            &RenderParams {
                samples_per_pixel: 0,
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn shrinking_stop_never_brightens() {
        let s = white_singlet(8);
        let p = RenderParams {
            samples_per_pixel: 16,
            seed: 5,
        };
        let wide = render(&s, &p).unwrap();
        let narrow = render(&s.with_stop_semi_diameter(2.0), &p).unwrap();
        for (a, b) in wide.data().iter().zip(narrow.data()) {
            assert!(b <= a);
        }
        assert!(narrow.mean() < wide.mean());
    }
}
