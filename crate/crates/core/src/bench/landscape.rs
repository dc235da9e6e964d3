use std::path::{Path, PathBuf};

use super::results::format_float;
use crate::env::{argmin, landscape_slice, EnvConfig, AXIS_NAMES};
use crate::io::pgm;
use crate::{Error, Result, SensorImage};

/// Marker file listing the grid minimum of every emitted slice.
pub const MINIMA_FILE: &str = "landscape_minima.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSlice {
    pub dim_i: usize,
    pub dim_j: usize,
    /// `grid[a][b]`: RMSE at dim_i = a/(n-1), dim_j = b/(n-1).
    pub grid: Vec<Vec<f64>>,
    pub argmin: (usize, usize),
    pub csv_path: PathBuf,
    pub pgm_path: PathBuf,
}

fn coord(k: usize, n: usize) -> f64 {
    k as f64 / (n - 1) as f64
}

/// Renders one slice per unordered pair of `dims` (all other coordinates
/// at the optimum) and writes a CSV matrix, a 16-bit PGM heatmap per pair
/// and the minima marker file into `out_dir`.
pub fn emit_landscape(
    config: &EnvConfig,
    reference: &SensorImage,
    dims: &[usize],
    grid_n: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<LandscapeSlice>> {
    if dims.len() < 2 {
        return Err(Error::invalid("landscape needs at least two dimensions"));
    }
    for (k, &d) in dims.iter().enumerate() {
        if d >= 6 || !config.active.0[d] || dims[..k].contains(&d) {
            return Err(Error::invalid(format!(
                "landscape dimension {d} must be distinct and active"
            )));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let mut slices = Vec::new();
    let mut minima = String::from("dim_i,dim_j,row,col,coord_i,coord_j,rmse\n");
    for (a, &i) in dims.iter().enumerate() {
        for &j in &dims[a + 1..] {
            let grid = landscape_slice(config, reference, i, j, grid_n, seed)?;
            let stem = format!("landscape_{}_{}", AXIS_NAMES[i], AXIS_NAMES[j]);
            let csv_path = out_dir.join(format!("{stem}.csv"));
            let pgm_path = out_dir.join(format!("{stem}.pgm"));

            let mut csv = format!("{}\\{}", AXIS_NAMES[i], AXIS_NAMES[j]);
            for b in 0..grid_n {
                csv.push(',');
                csv.push_str(&format_float(coord(b, grid_n)));
            }
            csv.push('\n');
            for (r, row) in grid.iter().enumerate() {
                csv.push_str(&format_float(coord(r, grid_n)));
                for v in row {
                    csv.push(',');
                    csv.push_str(&format_float(*v));
                }
                csv.push('\n');
            }
            std::fs::write(&csv_path, csv)?;

            let image = SensorImage::from_data(grid_n, grid_n, grid.concat())?;
            pgm::write_sensor_pgm(&pgm_path, &image, None)?;

            let (r, c) = argmin(&grid);
            minima.push_str(&format!(
                "{},{},{r},{c},{},{},{}\n",
                AXIS_NAMES[i],
                AXIS_NAMES[j],
                format_float(coord(r, grid_n)),
                format_float(coord(c, grid_n)),
                format_float(grid[r][c]),
            ));
            slices.push(LandscapeSlice {
                dim_i: i,
                dim_j: j,
                grid,
                argmin: (r, c),
                csv_path,
                pgm_path,
            });
        }
    }
    std::fs::write(out_dir.join(MINIMA_FILE), minima)?;
    Ok(slices)
}

/// Reads a slice matrix written by [`emit_landscape`] (values only).
pub fn read_landscape_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::format("landscape csv", e.to_string()))?;
    csv.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::format("landscape csv", e.to_string()))?;
            rec.iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::format("landscape csv", format!("bad value {v:?}")))
                })
                .collect()
        })
        .collect()
}
