//! Isotropic total variation with forward differences and reflexive
//! boundaries, and Chambolle's dual projection solver for
//! `min_u 1/2 ||u - b||² + reg · TV(u)`.
//!
//! Everything here works on sample values; the grid spacing does not enter.

use ndarray::{Array2, Zip};

use crate::error::{PatError, Result};
use crate::grid::{Field, ImageField};

use super::admm::AdmmConfig;

/// Chambolle step; `1/8` is the bound with guaranteed convergence.
pub const CHAMBOLLE_STEP: f64 = 0.125;
const GAP_EVERY: usize = 5;

/// Forward differences; the last row/column difference is zero.
pub fn gradient(u: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (nx, ny) = u.dim();
    let mut gx = Array2::zeros((nx, ny));
    let mut gy = Array2::zeros((nx, ny));
    for i in 0..nx {
        for k in 0..ny {
            if i + 1 < nx {
                gx[[i, k]] = u[[i + 1, k]] - u[[i, k]];
            }
            if k + 1 < ny {
                gy[[i, k]] = u[[i, k + 1]] - u[[i, k]];
            }
        }
    }
    (gx, gy)
}

/// Negative transpose of [`gradient`].
pub fn divergence(px: &Array2<f64>, py: &Array2<f64>) -> Array2<f64> {
    let (nx, ny) = px.dim();
    let mut d = Array2::zeros((nx, ny));
    for i in 0..nx {
        for k in 0..ny {
            let mut v = 0.0;
            if i + 1 < nx {
                v += px[[i, k]];
            }
            if i > 0 {
                v -= px[[i - 1, k]];
            }
            if k + 1 < ny {
                v += py[[i, k]];
            }
            if k > 0 {
                v -= py[[i, k - 1]];
            }
            d[[i, k]] = v;
        }
    }
    d
}

pub fn tv_of_values(u: &Array2<f64>) -> f64 {
    let (gx, gy) = gradient(u);
    Zip::from(&gx).and(&gy).fold(0.0, |acc, a, b| acc + a.hypot(*b))
}

/// Discrete isotropic TV of the sample values.
pub fn total_variation(f: &ImageField) -> f64 {
    tv_of_values(f.values())
}

/// Dual variable of the TV problem, kept between warm-started solves.
#[derive(Debug, Clone, PartialEq)]
pub struct TvDual {
    pub px: Array2<f64>,
    pub py: Array2<f64>,
}

impl TvDual {
    pub fn zeros(shape: (usize, usize)) -> Self {
        Self {
            px: Array2::zeros(shape),
            py: Array2::zeros(shape),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TvSolve {
    pub values: Array2<f64>,
    pub dual: TvDual,
    pub iterations: usize,
    /// Duality gap relative to the primal objective.
    pub gap: f64,
    pub converged: bool,
}

fn primal_dual_gap(b: &Array2<f64>, u: &Array2<f64>, reg: f64) -> f64 {
    let fid: f64 = Zip::from(u).and(b).fold(0.0, |a, x, y| a + (x - y).powi(2));
    let primal = 0.5 * fid + reg * tv_of_values(u);
    // dual value 1/2 ||b||² - 1/2 ||u||² with u = b - reg · div p
    let bb: f64 = b.iter().map(|v| v * v).sum();
    let uu: f64 = u.iter().map(|v| v * v).sum();
    let dual = 0.5 * (bb - uu);
    let gap = (primal - dual).max(0.0);
    gap / primal.abs().max(f64::MIN_POSITIVE)
}

/// Chambolle iterations from the given dual start; never errors.
pub fn chambolle(
    b: &Array2<f64>,
    reg: f64,
    max_iters: usize,
    tol: f64,
    warm: Option<TvDual>,
) -> TvSolve {
    let mut dual = warm.unwrap_or_else(|| TvDual::zeros(b.dim()));
    let inv = 1.0 / reg;
    let mut u = b - &(divergence(&dual.px, &dual.py) * reg);
    let mut gap = primal_dual_gap(b, &u, reg);
    if gap <= tol {
        return TvSolve {
            values: u,
            dual,
            iterations: 0,
            gap,
            converged: true,
        };
    }
    for it in 1..=max_iters {
        let w = divergence(&dual.px, &dual.py) - &(b * inv);
        let (gx, gy) = gradient(&w);
        Zip::from(&mut dual.px)
            .and(&mut dual.py)
            .and(&gx)
            .and(&gy)
            .for_each(|px, py, &ax, &ay| {
                let den = 1.0 + CHAMBOLLE_STEP * ax.hypot(ay);
                *px = (*px + CHAMBOLLE_STEP * ax) / den;
                *py = (*py + CHAMBOLLE_STEP * ay) / den;
            });
        if it % GAP_EVERY == 0 || it == max_iters {
            u = b - &(divergence(&dual.px, &dual.py) * reg);
            gap = primal_dual_gap(b, &u, reg);
            if gap <= tol {
                return TvSolve {
                    values: u,
                    dual,
                    iterations: it,
                    gap,
                    converged: true,
                };
            }
        }
    }
    TvSolve {
        values: u,
        dual,
        iterations: max_iters,
        gap,
        converged: false,
    }
}

/// `argmin_u 1/2 ||u - b||² + reg · TV(u)` with iteration budget and gap
/// tolerance taken from `cfg`.
pub fn tv_denoise_chambolle(b: &ImageField, reg: f64, cfg: &AdmmConfig) -> Result<ImageField> {
    if !(reg > 0.0) {
        return Err(PatError::InvalidParams(format!("TV weight must be positive, got {reg}")));
    }
    let out = chambolle(b.values(), reg, cfg.tv_inner_iters, cfg.tv_inner_tol, None);
    if !out.converged {
        return Err(PatError::NotConverged {
            solver: "chambolle",
            iterations: out.iterations,
            residual: out.gap,
        });
    }
    b.with_values(out.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(iters: usize, tol: f64) -> AdmmConfig {
        AdmmConfig {
            tv_inner_iters: iters,
            tv_inner_tol: tol,
            ..AdmmConfig::default()
        }
    }

    #[test]
    fn divergence_is_negative_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = Array2::from_shape_fn((5, 7), |_| rng.gen_range(-1.0..1.0));
        let px = Array2::from_shape_fn((5, 7), |_| rng.gen_range(-1.0..1.0));
        let py = Array2::from_shape_fn((5, 7), |_| rng.gen_range(-1.0..1.0));
        let (gx, gy) = gradient(&u);
        let lhs: f64 = (&gx * &px).sum() + (&gy * &py).sum();
        let rhs: f64 = -(&u * &divergence(&px, &py)).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn constant_is_fixed() {
        let g = Grid2D::new(8, 8, 2, 0.1, 0.1).unwrap();
        let b = ImageField::from_fn(g, |_, _| 1.7).unwrap();
        let out = tv_denoise_chambolle(&b, 0.5, &cfg(100, 1e-6)).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn vanishing_weight_returns_input() {
        let g = Grid2D::new(8, 8, 2, 0.1, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let out = tv_denoise_chambolle(&b, 1e-8, &cfg(1000, 1e-6)).unwrap();
        for (x, y) in out.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn output_has_no_more_tv_than_input() {
        let g = Grid2D::new(16, 16, 2, 0.1, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let out = tv_denoise_chambolle(&b, 0.2, &cfg(5000, 1e-6)).unwrap();
        assert!(total_variation(&out) <= total_variation(&b));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let g = Grid2D::new(16, 16, 2, 0.1, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        assert!(matches!(
            tv_denoise_chambolle(&b, 0.5, &cfg(3, 1e-12)),
            Err(PatError::NotConverged { solver: "chambolle", .. })
        ));
        assert!(tv_denoise_chambolle(&b, 0.0, &cfg(3, 1e-12)).is_err());
    }
}
