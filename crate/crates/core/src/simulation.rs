//! Disk phantoms, seeded white noise and limited-view masks.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{PatError, Result};
use crate::grid::{DataField, Field, Grid2D, ImageField};

const SUPERSAMPLE: usize = 4;

/// Uniform disk `amplitude · 1{|p - c| < radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disk {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Disk {
    pub fn new(center_x: f64, center_y: f64, radius: f64, amplitude: f64) -> Self {
        Self {
            center_x,
            center_y,
            radius,
            amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub disks: Vec<Disk>,
    pub grid: Grid2D,
}

impl PhantomSpec {
    /// Every disk must keep `2·dx` clearance from `y = 0` and from the
    /// image box.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let clear = 2.0 * g.delta_x;
        let (x0, x1) = g.x_extent();
        let (_, y1) = g.y_extent();
        for (i, d) in self.disks.iter().enumerate() {
            if !(d.radius > 0.0 && d.radius.is_finite() && d.amplitude.is_finite()) {
                return Err(PatError::SupportViolation(format!(
                    "disk {i} has invalid radius {} or amplitude {}",
                    d.radius, d.amplitude
                )));
            }
            if d.center_y - d.radius < clear {
                return Err(PatError::SupportViolation(format!(
                    "disk {i} at ({}, {}) radius {} comes within {clear} of y = 0",
                    d.center_x, d.center_y, d.radius
                )));
            }
            if d.center_y + d.radius > y1 - clear
                || d.center_x - d.radius < x0 + clear
                || d.center_x + d.radius > x1 - clear
            {
                return Err(PatError::SupportViolation(format!(
                    "disk {i} at ({}, {}) radius {} leaves the image box",
                    d.center_x, d.center_y, d.radius
                )));
            }
        }
        Ok(())
    }
}

/// Sum of disk indicators with `4 x 4` supersampling in every cell.
pub fn make_phantom(spec: &PhantomSpec) -> Result<ImageField> {
    spec.validate()?;
    let g = spec.grid;
    let d = g.delta_x;
    let inv = 1.0 / (SUPERSAMPLE * SUPERSAMPLE) as f64;
    let offsets: Vec<f64> = (0..SUPERSAMPLE)
        .map(|a| ((a as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5) * d)
        .collect();
    ImageField::from_fn(g, |x, y| {
        let mut acc = 0.0;
        for disk in &spec.disks {
            let reach = disk.radius + d;
            if (x - disk.center_x).abs() > reach || (y - disk.center_y).abs() > reach {
                continue;
            }
            let r2 = disk.radius * disk.radius;
            let mut hits = 0;
            for ox in &offsets {
                for oy in &offsets {
                    let dx = x + ox - disk.center_x;
                    let dy = y + oy - disk.center_y;
                    if dx * dx + dy * dy < r2 {
                        hits += 1;
                    }
                }
            }
            acc += disk.amplitude * hits as f64 * inv;
        }
        acc
    })
}

/// 128 x 128 image on `[-2, 2] x (0, 4]`, 512 time samples up to `T = 4`.
pub fn default_grid() -> Grid2D {
    Grid2D::square(128, 4.0, 512, 4.0).expect("default grid")
}

/// Three shallow disks centred under the detector.
pub fn default_phantom(grid: Grid2D) -> PhantomSpec {
    PhantomSpec {
        disks: vec![
            Disk::new(-0.35, 0.3, 0.15, 2.0),
            Disk::new(0.3, 0.25, 0.12, 2.0),
            Disk::new(0.0, 0.45, 0.2, 2.0),
        ],
        grid,
    }
}

/// Single small disk used for the isometry and reproduction checks.
pub fn isometry_phantom(grid: Grid2D) -> PhantomSpec {
    PhantomSpec {
        disks: vec![Disk::new(0.0, 0.25, 0.1, 1.0)],
        grid,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Seed of Monte-Carlo trial `trial`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

/// I.i.d. centred Gaussian samples of deviation `sigma` on the data grid.
pub fn white_noise(grid: Grid2D, sigma: f64, seed: u64) -> Result<DataField> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(PatError::InvalidParams(format!("noise deviation {sigma} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(DataField::zeros(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| PatError::InvalidParams(e.to_string()))?;
    let values = Array2::from_shape_simple_fn(grid.data_shape(), || normal.sample(&mut rng));
    DataField::new(grid, values)
}

pub fn add_noise(g: &DataField, noise: &NoiseSpec) -> Result<DataField> {
    if noise.sigma == 0.0 {
        return Ok(g.clone());
    }
    g.add(&white_noise(*g.grid(), noise.sigma, noise.seed)?)
}

/// Zeroes every sample outside `aperture x [0, t_max]`.
pub fn apply_limited_view(g: &DataField, aperture: (f64, f64), t_max: f64) -> Result<DataField> {
    let grid = g.grid();
    let (x0, x1) = grid.x_extent();
    let (a, b) = aperture;
    if !(a.is_finite() && b.is_finite()) || a > b || a < x0 - 1e-12 || b > x1 + 1e-12 {
        return Err(PatError::BadAperture(format!(
            "aperture [{a}, {b}] is not inside [{x0}, {x1}]"
        )));
    }
    if !(t_max >= 0.0) || t_max > grid.t_max() + 1e-12 {
        return Err(PatError::BadAperture(format!(
            "time window {t_max} exceeds the recorded {}",
            grid.t_max()
        )));
    }
    let mut values = g.values().clone();
    for ((i, m), v) in values.indexed_iter_mut() {
        let x = grid.x_node(i);
        if x < a || x > b || grid.t_node(m) > t_max {
            *v = 0.0;
        }
    }
    g.with_values(values)
}
