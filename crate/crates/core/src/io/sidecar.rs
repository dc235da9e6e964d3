//! Raw float sidecar: 16-byte header (`RLGNF32\0`, width and height as
//! little-endian u32) followed by row-major little-endian f32 values.

use std::fs;
use std::path::Path;

use crate::{Error, Result, SensorImage};

pub const MAGIC: &[u8; 8] = b"RLGNF32\0";
pub const HEADER_LEN: usize = 16;

pub fn encode(image: &SensorImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * image.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(image.width() as u32).to_le_bytes());
    out.extend_from_slice(&(image.height() as u32).to_le_bytes());
    for &v in image.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<SensorImage> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::format("float sidecar", "missing RLGNF32 header"));
    }
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * width * height {
        return Err(Error::format(
            "float sidecar",
            format!(
                "expected {} data bytes, found {}",
                4 * width * height,
                body.len()
            ),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    SensorImage::from_data(width, height, data)
}

pub fn write(path: &Path, image: &SensorImage) -> Result<()> {
    fs::write(path, encode(image))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<SensorImage> {
    decode(&fs::read(path)?)
}
