//! Binary PGM (P5) codecs.
//!
//! Sensor images are written as 16-bit big-endian samples linearly mapped
//! from `[0, max_value]`, where `max_value` is stored in a `# max_value`
//! header comment. Emitter bitmaps use plain 8-bit PGM.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::pattern::Bitmap;
use crate::{Error, Result, SensorImage};

const MAX_VALUE_TAG: &str = "max_value";

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    max_value: Option<f64>,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let err = |m: &str| Error::format("PGM", m);
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(err("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = Vec::with_capacity(3);
    let mut max_value = None;
    while fields.len() < 3 {
        match bytes.get(pos) {
            None => return Err(err("truncated header")),
            Some(b'#') => {
                let end = bytes[pos..]
                    .iter()
                    .position(|&b| b == b'\n')
                    .map(|e| pos + e)
                    .ok_or_else(|| err("unterminated comment"))?;
                let comment = String::from_utf8_lossy(&bytes[pos + 1..end]);
                let mut parts = comment.split_whitespace();
                if parts.next() == Some(MAX_VALUE_TAG) {
                    max_value = parts.next().and_then(|v| v.parse::<f64>().ok());
                }
                pos = end + 1;
            }
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            Some(_) => {
                let start = pos;
                while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                let token =
                    std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("non-ASCII header"))?;
                fields.push(token.parse::<u32>().map_err(|_| err("bad header number"))?);
            }
        }
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let (width, height, maxval) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(err("invalid dimensions or maxval"));
    }
    Ok(Header {
        width,
        height,
        maxval,
        max_value,
        data_offset: pos,
    })
}

/// Encodes a sensor image as 16-bit PGM. When `max_value` is `None` the
/// image maximum is used (1 for an all-black image).
pub fn encode_sensor_pgm(image: &SensorImage, max_value: Option<f64>) -> Vec<u8> {
    let max_value = max_value
        .filter(|m| *m > 0.0)
        .unwrap_or_else(|| match image.max_value() {
            m if m > 0.0 => m,
            _ => 1.0,
        });
    let mut out = format!(
        "P5\n# {MAX_VALUE_TAG} {max_value:.17e}\n{} {}\n65535\n",
        image.width(),
        image.height()
    )
    .into_bytes();
    out.reserve(image.data().len() * 2);
    for &v in image.data() {
        let q = (v / max_value * 65535.0).round().clamp(0.0, 65535.0) as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Decodes a 16-bit (or 8-bit) PGM into irradiance values using the
/// declared `max_value` (1 when absent). Returns the image and the scale.
pub fn decode_sensor_pgm(bytes: &[u8]) -> Result<(SensorImage, f64)> {
    let h = parse_header(bytes)?;
    let scale = h.max_value.unwrap_or(1.0);
    let wide = h.maxval > 255;
    let n = h.width * h.height;
    let raster = &bytes[h.data_offset.min(bytes.len())..];
    let need = if wide { 2 * n } else { n };
    if raster.len() < need {
        return Err(Error::format("PGM", "truncated raster"));
    }
    let data = (0..n)
        .map(|i| {
            let q = if wide {
                u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as f64
            } else {
                raster[i] as f64
            };
            q / h.maxval as f64 * scale
        })
        .collect();
    Ok((SensorImage::from_data(h.width, h.height, data)?, scale))
}

pub fn write_sensor_pgm(path: &Path, image: &SensorImage, max_value: Option<f64>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_sensor_pgm(image, max_value))?;
    Ok(())
}

pub fn read_sensor_pgm(path: &Path) -> Result<(SensorImage, f64)> {
    decode_sensor_pgm(&fs::read(path)?)
}

pub fn encode_bitmap_pgm(bitmap: &Bitmap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", bitmap.width(), bitmap.height()).into_bytes();
    out.extend(bitmap.data().iter().map(|v| (v * 255.0).round() as u8));
    out
}

pub fn decode_bitmap_pgm(bytes: &[u8]) -> Result<Bitmap> {
    let h = parse_header(bytes)?;
    let (image, _) = decode_sensor_pgm(bytes)?;
    // an 8-bit file without max_value decodes to [0, 1] already; a 16-bit one
    // is normalized by its own maxval
    let scale = h.max_value.unwrap_or(1.0);
    let data = image
        .data()
        .iter()
        .map(|v| (v / scale).clamp(0.0, 1.0))
        .collect();
    Bitmap::new(h.width, h.height, data)
}

pub fn write_bitmap_pgm(path: &Path, bitmap: &Bitmap) -> Result<()> {
    fs::write(path, encode_bitmap_pgm(bitmap))?;
    Ok(())
}

pub fn read_bitmap_pgm(path: &Path) -> Result<Bitmap> {
    decode_bitmap_pgm(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let img = SensorImage::from_data(2, 1, vec![0.0, 0.5]).unwrap();
        let bytes = encode_sensor_pgm(&img, Some(1.0));
        let text = String::from_utf8_lossy(&bytes[..bytes.len() - 4]).to_string();
        assert!(
            text.starts_with("P5\n# max_value 1.00000000000000000e0\n2 1\n65535\n"),
            "{text}"
        );
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 0x80, 0x00]);
    }

    #[test]
    fn bitmap_roundtrip_exact_for_binary() {
        let b = pattern::siemens_star(32, 8).unwrap();
        assert_eq!(decode_bitmap_pgm(&encode_bitmap_pgm(&b)).unwrap(), b);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_sensor_pgm(b"P6\n1 1\n255\n\0").is_err());
        assert!(decode_sensor_pgm(b"P5\n2 2\n255\n\0").is_err());
    }

    proptest! {
        #[test]
        fn sensor_roundtrip_within_one_step(values in prop::collection::vec(0.0f64..3.0, 1..64)) {
            let img = SensorImage::from_data(values.len(), 1, values.clone()).unwrap();
            let (back, max) = decode_sensor_pgm(&encode_sensor_pgm(&img, None)).unwrap();
            let step = max / 65535.0;
            for (a, b) in img.data().iter().zip(back.data()) {
                prop_assert!((a - b).abs() <= 0.5 * step + 1e-15);
            }
        }
    }
}
