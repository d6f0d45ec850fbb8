//! Reference computations written independently of `pat-core`'s solvers,
//! used by the acceptance suite.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_array(shape: (usize, usize), seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_fn(shape, |_| r.gen_range(-1.0..1.0))
}

/// `sqrt(cell · sum v²)`.
pub fn riemann_norm(values: &Array2<f64>, cell: f64) -> f64 {
    (cell * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

/// Disk indicator on an `n x n` cell-centred grid of spacing `dx`, `x`
/// centred on 0 and `y` starting at 0, with `ss x ss` point sampling per cell.
/// No clearance requirement, so coarse grids can hold shallow disks.
pub fn raster_disk(n: usize, dx: f64, center: (f64, f64), radius: f64, ss: usize) -> Array2<f64> {
    let half = n as f64 * dx / 2.0;
    let r2 = radius * radius;
    Array2::from_shape_fn((n, n), |(i, k)| {
        let x = (i as f64 + 0.5) * dx - half;
        let y = (k as f64 + 0.5) * dx;
        let mut hits = 0usize;
        for a in 0..ss {
            for b in 0..ss {
                let px = x + ((a as f64 + 0.5) / ss as f64 - 0.5) * dx - center.0;
                let py = y + ((b as f64 + 0.5) / ss as f64 - 0.5) * dx - center.1;
                if px * px + py * py < r2 {
                    hits += 1;
                }
            }
        }
        hits as f64 / (ss * ss) as f64
    })
}

fn grad(u: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (nx, ny) = u.dim();
    let gx = Array2::from_shape_fn((nx, ny), |(i, k)| {
        if i + 1 < nx {
            u[[i + 1, k]] - u[[i, k]]
        } else {
            0.0
        }
    });
    let gy = Array2::from_shape_fn((nx, ny), |(i, k)| {
        if k + 1 < ny {
            u[[i, k + 1]] - u[[i, k]]
        } else {
            0.0
        }
    });
    (gx, gy)
}

/// Transpose of [`grad`], accumulated entry by entry.
fn grad_t(px: &Array2<f64>, py: &Array2<f64>) -> Array2<f64> {
    let (nx, ny) = px.dim();
    let mut out = Array2::zeros((nx, ny));
    for i in 0..nx {
        for k in 0..ny {
            if i + 1 < nx {
                out[[i + 1, k]] += px[[i, k]];
                out[[i, k]] -= px[[i, k]];
            }
            if k + 1 < ny {
                out[[i, k + 1]] += py[[i, k]];
                out[[i, k]] -= py[[i, k]];
            }
        }
    }
    out
}

/// Isotropic TV with forward differences and Neumann boundary.
pub fn tv(u: &Array2<f64>) -> f64 {
    let (gx, gy) = grad(u);
    gx.iter().zip(gy.iter()).map(|(a, c)| a.hypot(*c)).sum()
}

/// `argmin_u 1/2 ||u - b||² + reg · TV(u)` by FISTA on the dual
/// `min_{|p_ik| <= 1} 1/2 ||b - reg · grad^T p||²`, `u = b - reg · grad^T p`.
pub fn fista_tv_dual(b: &Array2<f64>, reg: f64, iters: usize) -> Array2<f64> {
    let shape = b.dim();
    let step = 1.0 / (8.0 * reg * reg);
    let mut px = Array2::<f64>::zeros(shape);
    let mut py = Array2::<f64>::zeros(shape);
    let (mut zx, mut zy) = (px.clone(), py.clone());
    let mut t = 1.0f64;
    for _ in 0..iters {
        let u = b - &(grad_t(&zx, &zy) * reg);
        let (gx, gy) = grad(&u);
        let mut nx = &zx + &(gx * (step * reg));
        let mut ny = &zy + &(gy * (step * reg));
        for (a, c) in nx.iter_mut().zip(ny.iter_mut()) {
            let m = a.hypot(*c);
            if m > 1.0 {
                *a /= m;
                *c /= m;
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        zx = &nx + &((&nx - &px) * mom);
        zy = &ny + &((&ny - &py) * mom);
        px = nx;
        py = ny;
        t = t_next;
    }
    b - &(grad_t(&px, &py) * reg)
}

/// `1/2 ||u - b||² + reg · TV(u)`.
pub fn tv_objective(u: &Array2<f64>, b: &Array2<f64>, reg: f64) -> f64 {
    let fid: f64 = u.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    0.5 * fid + reg * tv(u)
}
