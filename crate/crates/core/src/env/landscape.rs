use super::pose::{Pose, OPTIMAL_COORD};
use super::EnvConfig;
use crate::optics::{render, RenderParams};
use crate::{rmse, Error, Result, SensorImage};

/// Pattern distance to the reference over a regular `grid_n`×`grid_n` grid
/// spanning [0, 1]² in dimensions (`dim_i`, `dim_j`), all other coordinates
/// at the ideal value and no variances. Entry `[a][b]` has
/// `s_i = a / (grid_n - 1)` and `s_j = b / (grid_n - 1)`. Every cell uses the
/// same render seed.
pub fn landscape_slice(
    config: &EnvConfig,
    reference: &SensorImage,
    dim_i: usize,
    dim_j: usize,
    grid_n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if dim_i == dim_j || dim_i >= 6 || dim_j >= 6 {
        return Err(Error::invalid(format!(
            "invalid dimension pair ({dim_i}, {dim_j})"
        )));
    }
    if !config.active.0[dim_i] || !config.active.0[dim_j] {
        return Err(Error::invalid("landscape dimensions must be active"));
    }
    if grid_n < 5 {
        return Err(Error::invalid("grid_n must be at least 5"));
    }
    let params = RenderParams {
        seed,
        ..config.render
    };
    let step = 1.0 / (grid_n - 1) as f64;
    let mut grid = vec![vec![0.0; grid_n]; grid_n];
    for (a, row) in grid.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let mut coords = [OPTIMAL_COORD; 6];
            coords[dim_i] = a as f64 * step;
            coords[dim_j] = b as f64 * step;
            let pose = Pose::new(coords)?;
            let img = render(&config.posed_system(&config.system, &pose), &params)?;
            *cell = rmse(&img, reference)?;
        }
    }
    Ok(grid)
}

/// Grid index of the smallest entry.
pub fn argmin(grid: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 0, f64::INFINITY);
    for (a, row) in grid.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if v < best.2 {
                best = (a, b, v);
            }
        }
    }
    (best.0, best.1)
}
