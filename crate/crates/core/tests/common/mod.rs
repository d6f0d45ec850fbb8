//! Helpers shared by the integration tests.

#![allow(dead_code)]

use ndarray::Array2;
use pat_core::grid::{DataField, Grid2D, ImageField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(grid: Grid2D, seed: u64) -> ImageField {
    let mut r = rng(seed);
    ImageField::from_fn(grid, |_, _| r.gen_range(-1.0..1.0)).unwrap()
}

pub fn random_data(grid: Grid2D, seed: u64) -> DataField {
    let mut r = rng(seed);
    DataField::from_fn(grid, |_, _| r.gen_range(-1.0..1.0)).unwrap()
}

pub fn rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

/// Isotropic TV with forward differences, written out independently.
pub fn tv(u: &Array2<f64>) -> f64 {
    let (nx, ny) = u.dim();
    let mut acc = 0.0;
    for i in 0..nx {
        for k in 0..ny {
            let gx = if i + 1 < nx { u[[i + 1, k]] - u[[i, k]] } else { 0.0 };
            let gy = if k + 1 < ny { u[[i, k + 1]] - u[[i, k]] } else { 0.0 };
            acc += gx.hypot(gy);
        }
    }
    acc
}
