//! Emitter test patterns.

use std::f64::consts::TAU;

use crate::{Error, Result};

/// Row-major grayscale bitmap with values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Bitmap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Bitmap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("bitmap dimensions must be at least 1"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "bitmap data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("bitmap values must lie in [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Bilinear lookup in continuous pixel coordinates, where pixel `(i, j)`
    /// has its center at `(i + 0.5, j + 0.5)`. Coordinates outside the bitmap
    /// read as 0; inside, neighbours are clamped to the edge.
    #[inline]
    pub fn sample_bilinear(&self, u: f64, v: f64) -> f64 {
        let (w, h) = (self.width as f64, self.height as f64);
        if !(0.0..=w).contains(&u) || !(0.0..=h).contains(&v) {
            return 0.0;
        }
        let fx = (u - 0.5).clamp(0.0, w - 1.0);
        let fy = (v - 0.5).clamp(0.0, h - 1.0);
        let x0 = fx.floor() as usize;
        let y0 = fy.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let row0 = y0 * self.width;
        let row1 = y1 * self.width;
        let top = self.data[row0 + x0] * (1.0 - tx) + self.data[row0 + x1] * tx;
        let bottom = self.data[row1 + x0] * (1.0 - tx) + self.data[row1 + x1] * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// Wedge index of the point `(dx, dy)` relative to the star center, with
/// wedge 0 starting at the +x axis and angles increasing counter-clockwise
/// (y up).
fn star_wedge(dx: f64, dy: f64, wedges: usize) -> usize {
    if dx == 0.0 && dy == 0.0 {
        return 0;
    }
    let angle = dy.atan2(dx).rem_euclid(TAU);
    ((angle / TAU * wedges as f64).floor() as usize) % wedges
}

/// Binary Siemens star around the image center with `sectors` white and
/// `sectors` black wedges alternating (period 2π/sectors). The wedge
/// starting at +x is white.
pub fn siemens_star(size: usize, sectors: usize) -> Result<Bitmap> {
    if sectors < 2 {
        return Err(Error::invalid(format!(
            "siemens star needs at least 2 sectors, got {sectors}"
        )));
    }
    if size < 16 {
        return Err(Error::invalid(format!(
            "siemens star size must be at least 16, got {size}"
        )));
    }
    let c = size as f64 / 2.0;
    Ok(Bitmap::from_fn(size, size, |x, y| {
        let dx = x as f64 + 0.5 - c;
        let dy = c - (y as f64 + 0.5);
        if star_wedge(dx, dy, 2 * sectors).is_multiple_of(2) {
            1.0
        } else {
            0.0
        }
    }))
}

pub fn chessboard(size: usize, tiles_per_side: usize) -> Result<Bitmap> {
    if tiles_per_side == 0 {
        return Err(Error::invalid("chessboard needs a positive tile count"));
    }
    if size == 0 {
        return Err(Error::invalid("chessboard size must be positive"));
    }
    Ok(Bitmap::from_fn(size, size, |x, y| {
        let tx = x * tiles_per_side / size;
        let ty = y * tiles_per_side / size;
        if (tx + ty).is_multiple_of(2) {
            1.0
        } else {
            0.0
        }
    }))
}

pub fn uniform(size: usize, value: f64) -> Result<Bitmap> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(format!(
            "uniform value {value} outside [0, 1]"
        )));
    }
    if size == 0 {
        return Err(Error::invalid("uniform bitmap size must be positive"));
    }
    Ok(Bitmap::from_fn(size, size, |_, _| value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_is_binary() {
        let b = siemens_star(64, 16).unwrap();
        assert!(b.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn star_rejects_few_sectors() {
        assert!(siemens_star(64, 1).is_err());
        assert!(siemens_star(8, 4).is_err());
    }

    #[test]
    fn star_transitions_on_circle() {
        // Independent sector count: walk a circle of radius size/4 and
        // count value changes between consecutive samples.
        for &(size, sectors) in &[(64usize, 4usize), (128, 8), (256, 12), (512, 16)] {
            let b = siemens_star(size, sectors).unwrap();
            let c = size as f64 / 2.0;
            let r = size as f64 / 4.0;
            let n = 10 * sectors;
            // half-step offset keeps samples off the sector boundaries
            let vals: Vec<f64> = (0..n)
                .map(|k| {
                    let a = (k as f64 + 0.5) / n as f64 * TAU;
                    let px = (c + r * a.cos()).floor() as usize;
                    let py = (c - r * a.sin()).floor() as usize;
                    b.get(px, py)
                })
                .collect();
            let transitions = (0..n).filter(|&k| vals[k] != vals[(k + 1) % n]).count();
            assert_eq!(transitions, 2 * sectors, "size {size} sectors {sectors}");
        }
    }

    #[test]
    fn star_rotation_invariance() {
        for &(size, sectors) in &[(256usize, 4usize), (512, 8)] {
            let b = siemens_star(size, sectors).unwrap();
            let c = size as f64 / 2.0;
            let rot = TAU / sectors as f64;
            let (s, co) = rot.sin_cos();
            let mut agree = 0usize;
            let mut total = 0usize;
            for y in 0..size {
                for x in 0..size {
                    let dx = x as f64 + 0.5 - c;
                    let dy = c - (y as f64 + 0.5);
                    let rx = co * dx - s * dy;
                    let ry = s * dx + co * dy;
                    let sx = (c + rx).floor();
                    let sy = (c - ry).floor();
                    if sx < 0.0 || sy < 0.0 || sx >= size as f64 || sy >= size as f64 {
                        continue;
                    }
                    total += 1;
                    if b.get(sx as usize, sy as usize) == b.get(x, y) {
                        agree += 1;
                    }
                }
            }
            assert!(
                agree as f64 / total as f64 >= 0.99,
                "{size}/{sectors}: {agree}/{total}"
            );
        }
    }

    #[test]
    fn star_center_in_sector_zero() {
        assert_eq!(star_wedge(0.0, 0.0, 16), 0);
        assert_eq!(star_wedge(1.0, 0.0, 16), 0);
        assert_eq!(star_wedge(-1.0, -1e-9, 2), 1);
        let b = siemens_star(16, 4).unwrap();
        // pixel just above-right of center lies in the first (white) wedge
        assert_eq!(b.get(9, 7), 1.0);
    }

    #[test]
    fn chessboard_alternates() {
        let tiles = 8;
        let size = 64;
        let b = chessboard(size, tiles).unwrap();
        let tile = size / tiles;
        for ty in 0..tiles {
            for tx in 0..tiles {
                let v = b.get(tx * tile, ty * tile);
                if tx + 1 < tiles {
                    assert_ne!(v, b.get((tx + 1) * tile, ty * tile));
                }
                if ty + 1 < tiles {
                    assert_ne!(v, b.get(tx * tile, (ty + 1) * tile));
                }
            }
        }
    }

    #[test]
    fn chessboard_interior_corners() {
        for tiles in 2..9usize {
            let size = tiles * 5;
            let b = chessboard(size, tiles).unwrap();
            // a corner is a 2x2 pixel neighbourhood with all four tiles distinct
            // in the checker sense: diagonal equal, adjacent different
            let mut corners = 0;
            for y in 0..size - 1 {
                for x in 0..size - 1 {
                    let a = b.get(x, y);
                    let r = b.get(x + 1, y);
                    let d = b.get(x, y + 1);
                    let rd = b.get(x + 1, y + 1);
                    if a != r && a != d && a == rd {
                        corners += 1;
                    }
                }
            }
            assert_eq!(corners, (tiles - 1) * (tiles - 1));
        }
    }

    #[test]
    fn chessboard_mean_half() {
        for &(size, tiles) in &[(64usize, 8usize), (60, 6), (100, 2)] {
            let b = chessboard(size, tiles).unwrap();
            let white = b.data().iter().filter(|&&v| v == 1.0).count();
            assert_eq!(white * 2, size * size);
            assert_eq!(b.mean(), 0.5);
        }
        assert!(chessboard(10, 0).is_err());
    }

    #[test]
    fn uniform_values() {
        assert!(uniform(8, 0.0).unwrap().data().iter().all(|&v| v == 0.0));
        assert!(uniform(8, 1.0).unwrap().data().iter().all(|&v| v == 1.0));
        assert_eq!(uniform(8, 0.25).unwrap().mean(), 0.25);
        assert!(uniform(8, 1.5).is_err());
        assert!(uniform(8, -0.1).is_err());
    }

    #[test]
    fn generators_are_pure() {
        assert_eq!(siemens_star(32, 6).unwrap(), siemens_star(32, 6).unwrap());
        assert_eq!(chessboard(32, 4).unwrap(), chessboard(32, 4).unwrap());
    }

    #[test]
    fn bilinear_lookup() {
        let b = Bitmap::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(b.sample_bilinear(0.5, 0.5), 0.0);
        assert_eq!(b.sample_bilinear(1.5, 0.5), 1.0);
        assert!((b.sample_bilinear(1.0, 0.5) - 0.5).abs() < 1e-15);
        // clamped at the edge, black outside
        assert_eq!(b.sample_bilinear(1.9, 0.2), 1.0);
        assert_eq!(b.sample_bilinear(2.1, 0.5), 0.0);
        assert_eq!(b.sample_bilinear(-0.1, 0.5), 0.0);
    }
}
