use crate::{Error, Result};

/// Row-major grid of nonnegative irradiance values as seen by the sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SensorImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "image data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!(
                "irradiance value {v} is not a finite nonnegative number"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len().max(1) as f64
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Pixel-wise mean of equally sized images.
    pub fn mean_of(images: &[SensorImage]) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::invalid("cannot average an empty image list"))?;
        let mut acc = vec![0.0; first.data.len()];
        for img in images {
            first.check_same_shape(img)?;
            for (a, v) in acc.iter_mut().zip(&img.data) {
                *a += v;
            }
        }
        let n = images.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(Self {
            width: first.width,
            height: first.height,
            data: acc,
        })
    }
}

/// Root mean squared pixel difference.
pub fn rmse(a: &SensorImage, b: &SensorImage) -> Result<f64> {
    a.check_same_shape(b)?;
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.data.len().max(1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, v: &[f64]) -> SensorImage {
        SensorImage::from_data(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn rmse_identical_is_zero() {
        let a = img(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rmse_constant_offset() {
        let a = img(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let b = img(2, 2, &[0.35, 0.45, 0.55, 0.65]);
        assert!((rmse(&a, &b).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rmse_hand_computed() {
        let a = img(2, 2, &[0.0; 4]);
        let b = img(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rmse(&a, &b).unwrap(), 0.5);
        assert_eq!(rmse(&b, &a).unwrap(), 0.5);
    }

    #[test]
    fn rmse_rejects_mismatch() {
        let a = img(2, 2, &[0.0; 4]);
        let b = img(4, 1, &[0.0; 4]);
        assert!(matches!(rmse(&a, &b), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn rejects_negative_values() {
        assert!(SensorImage::from_data(1, 1, vec![-1.0]).is_err());
        assert!(SensorImage::from_data(2, 1, vec![1.0]).is_err());
    }
}
