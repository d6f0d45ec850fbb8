//! Sampling lattices and the two field containers shared by every module.
//!
//! Image samples live at cell centres `x_i = (i + 1/2)·dx − n_x·dx/2`,
//! `y_k = (k + 1/2)·dx`; detector samples share the `x_i` lattice and sit at
//! times `t_m = (m + 1/2)·dt`. No node ever lands on `y = 0` or `t = 0`, so
//! the `y^{1/2}` and `t^{-1/2}` weights stay bounded.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{PatError, Result};

/// Uniform image/detector/time lattice. Sound speed is normalised to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub n_x: usize,
    pub n_y: usize,
    pub n_t: usize,
    pub delta_x: f64,
    pub delta_t: f64,
}

impl Grid2D {
    pub fn new(n_x: usize, n_y: usize, n_t: usize, delta_x: f64, delta_t: f64) -> Result<Self> {
        for (name, n) in [("n_x", n_x), ("n_y", n_y), ("n_t", n_t)] {
            if n < 2 || !n.is_power_of_two() {
                return Err(PatError::InvalidGrid(format!(
                    "{name} = {n} must be a power of two >= 2"
                )));
            }
        }
        if !(delta_x.is_finite() && delta_x > 0.0) {
            return Err(PatError::InvalidGrid(format!("delta_x = {delta_x} must be positive")));
        }
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(PatError::InvalidGrid(format!("delta_t = {delta_t} must be positive")));
        }
        Ok(Self {
            n_x,
            n_y,
            n_t,
            delta_x,
            delta_t,
        })
    }

    /// Square image of side `n` spanning `[-width/2, width/2] x (0, width]`,
    /// observed until time `t_max` with `n_t` samples.
    pub fn square(n: usize, width: f64, n_t: usize, t_max: f64) -> Result<Self> {
        Self::new(n, n, n_t, width / n as f64, t_max / n_t as f64)
    }

    #[inline]
    pub fn x_node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.delta_x - 0.5 * self.n_x as f64 * self.delta_x
    }

    #[inline]
    pub fn y_node(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.delta_x
    }

    #[inline]
    pub fn t_node(&self, m: usize) -> f64 {
        (m as f64 + 0.5) * self.delta_t
    }

    pub fn x_extent(&self) -> (f64, f64) {
        let half = 0.5 * self.n_x as f64 * self.delta_x;
        (-half, half)
    }

    pub fn y_extent(&self) -> (f64, f64) {
        (0.0, self.n_y as f64 * self.delta_x)
    }

    /// Length of the recorded time window.
    pub fn t_max(&self) -> f64 {
        self.n_t as f64 * self.delta_t
    }

    /// Shannon sampling check for data of essential bandwidth `omega`.
    pub fn is_nyquist_ok(&self, omega: f64) -> bool {
        let bound = std::f64::consts::PI / omega;
        self.delta_x <= bound && self.delta_t <= bound
    }

    pub fn image_shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    pub fn data_shape(&self) -> (usize, usize) {
        (self.n_x, self.n_t)
    }

    pub(crate) fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(PatError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1]` in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl SupportBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

fn check_finite(values: &Array2<f64>) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(idx) => Err(PatError::NonFinite(idx)),
        None => Ok(()),
    }
}

/// Common view over image- and detector-domain samples.
pub trait Field {
    fn grid(&self) -> &Grid2D;
    fn values(&self) -> &Array2<f64>;
    /// Area element of one sample for the Riemann-sum inner product.
    fn cell_measure(&self) -> f64;
}

/// Riemann-sum approximation of the L² inner product.
pub fn inner_product<F: Field>(a: &F, b: &F) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let dot: f64 = a
        .values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| x * y)
        .sum();
    Ok(dot * a.cell_measure())
}

pub fn norm<F: Field>(a: &F) -> f64 {
    let sq: f64 = a.values().iter().map(|v| v * v).sum();
    (sq * a.cell_measure()).sqrt()
}

/// Initial pressure (or its weighted counterpart) sampled on the image lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageField {
    grid: Grid2D,
    values: Array2<f64>,
    support_box: Option<SupportBox>,
}

impl ImageField {
    pub fn new(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != grid.image_shape() {
            return Err(PatError::ShapeMismatch(format!(
                "image values {:?} vs grid {:?}",
                values.dim(),
                grid.image_shape()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            grid,
            values,
            support_box: None,
        })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: Array2::zeros(grid.image_shape()),
            support_box: None,
        }
    }

    /// Samples `f(x, y)` at every cell centre.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let values =
            Array2::from_shape_fn(grid.image_shape(), |(i, k)| f(grid.x_node(i), grid.y_node(k)));
        Self::new(grid, values)
    }

    /// Declares a support box; fails if any sample outside it is non-zero.
    pub fn with_support(mut self, support: SupportBox) -> Result<Self> {
        if support.y0 < 0.0 {
            return Err(PatError::SupportViolation(format!(
                "support box reaches y = {} below the detector line",
                support.y0
            )));
        }
        for ((i, k), &v) in self.values.indexed_iter() {
            if v != 0.0 && !support.contains(self.grid.x_node(i), self.grid.y_node(k)) {
                return Err(PatError::SupportViolation(format!(
                    "value {v} at ({}, {}) outside declared support",
                    self.grid.x_node(i),
                    self.grid.y_node(k)
                )));
            }
        }
        self.support_box = Some(support);
        Ok(self)
    }

    pub fn support_box(&self) -> Option<SupportBox> {
        self.support_box
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Same grid, new samples. Drops the support declaration.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        Self::new(self.grid, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * c,
            support_box: self.support_box,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Self::new(self.grid, &self.values - &other.values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Self::new(self.grid, &self.values + &other.values)
    }
}

impl Field for ImageField {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }
    fn values(&self) -> &Array2<f64> {
        &self.values
    }
    fn cell_measure(&self) -> f64 {
        self.grid.delta_x * self.grid.delta_x
    }
}

/// Pressure traces on the detector line, indexed `(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataField {
    grid: Grid2D,
    values: Array2<f64>,
}

impl DataField {
    pub fn new(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != grid.data_shape() {
            return Err(PatError::ShapeMismatch(format!(
                "data values {:?} vs grid {:?}",
                values.dim(),
                grid.data_shape()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: Array2::zeros(grid.data_shape()),
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let values =
            Array2::from_shape_fn(grid.data_shape(), |(i, m)| f(grid.x_node(i), grid.t_node(m)));
        Self::new(grid, values)
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        Self::new(self.grid, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * c,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Self::new(self.grid, &self.values - &other.values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Self::new(self.grid, &self.values + &other.values)
    }
}

impl Field for DataField {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }
    fn values(&self) -> &Array2<f64> {
        &self.values
    }
    fn cell_measure(&self) -> f64 {
        self.grid.delta_x * self.grid.delta_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn node_formulas() {
        let g = Grid2D::new(128, 128, 256, 1.0 / 128.0, 1.0 / 128.0).unwrap();
        assert!(g.y_node(0) > 0.0 && g.y_node(127) < 1.0);
        assert!(g.t_node(0) > 0.0 && g.t_node(255) < 2.0);
        assert_eq!(g.y_extent(), (0.0, 1.0));
        assert_eq!(g.t_max(), 2.0);
        assert!((g.x_node(0) + g.x_node(127)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_counts_and_steps() {
        assert!(matches!(
            Grid2D::new(3, 8, 8, 0.1, 0.1),
            Err(PatError::InvalidGrid(_))
        ));
        assert!(Grid2D::new(8, 8, 1, 0.1, 0.1).is_err());
        assert!(Grid2D::new(8, 8, 8, 0.0, 0.1).is_err());
        assert!(Grid2D::new(8, 8, 8, 0.1, -1.0).is_err());
    }

    #[test]
    fn nyquist_flag() {
        let g = Grid2D::new(64, 64, 128, 1.0 / 64.0, 1.0 / 64.0).unwrap();
        // pi/150 ≈ 0.0209 >= 1/64 ≈ 0.0156
        assert!(g.is_nyquist_ok(150.0));
        assert!(!g.is_nyquist_ok(250.0));
    }

    #[test]
    fn unit_mass_inner_product() {
        let g = Grid2D::new(8, 8, 8, 0.125, 0.125).unwrap();
        let one = ImageField::from_fn(g, |_, _| 1.0).unwrap();
        assert!((inner_product(&one, &one).unwrap() - 1.0).abs() < 1e-12);
        let zero = ImageField::zeros(g);
        assert_eq!(inner_product(&one, &zero).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_matches_double_loop() {
        let g = Grid2D::new(8, 8, 16, 0.3, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Array2::from_shape_fn((8, 8), |_| rng.gen_range(-1.0..1.0));
        let b = Array2::from_shape_fn((8, 8), |_| rng.gen_range(-1.0..1.0));
        let mut oracle = 0.0;
        for i in 0..8 {
            for k in 0..8 {
                oracle += a[[i, k]] * b[[i, k]] * 0.3 * 0.3;
            }
        }
        let fa = ImageField::new(g, a).unwrap();
        let fb = ImageField::new(g, b).unwrap();
        assert!((inner_product(&fa, &fb).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let g1 = Grid2D::new(8, 8, 8, 0.1, 0.1).unwrap();
        let g2 = Grid2D::new(8, 8, 8, 0.2, 0.1).unwrap();
        let r = inner_product(&ImageField::zeros(g1), &ImageField::zeros(g2));
        assert!(matches!(r, Err(PatError::GridMismatch(_))));
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid2D::new(2, 2, 2, 1.0, 1.0).unwrap();
        let mut v = Array2::zeros((2, 2));
        v[[1, 0]] = f64::NAN;
        assert!(matches!(ImageField::new(g, v), Err(PatError::NonFinite(2))));
    }

    #[test]
    fn support_box_enforced() {
        let g = Grid2D::new(8, 8, 8, 0.25, 0.25).unwrap();
        let f = ImageField::from_fn(g, |x, y| if x.abs() < 0.3 && y < 0.6 { 1.0 } else { 0.0 })
            .unwrap();
        let ok = SupportBox { x0: -0.5, x1: 0.5, y0: 0.0, y1: 1.0 };
        assert!(f.clone().with_support(ok).is_ok());
        let tight = SupportBox { x0: 0.0, x1: 0.5, y0: 0.0, y1: 1.0 };
        assert!(matches!(f.clone().with_support(tight), Err(PatError::SupportViolation(_))));
        let below = SupportBox { x0: -1.0, x1: 1.0, y0: -0.1, y1: 1.0 };
        assert!(f.with_support(below).is_err());
    }
}
