//! Forward wave map to the detector line `y = 0`, the weighted operator
//! `A = t^{-1/2} ∘ U ∘ y^{1/2}` and its exact discrete adjoint.
//!
//! The spectral backend extends `h` evenly about `y = 0` (a DCT-II in `y`),
//! zero-pads in `x` (an FFT), multiplies by `cos(|k| t)` and evaluates the
//! trigonometric interpolant exactly on the detector line. Padding is chosen
//! so no wrapped copy of the source reaches the detector before `T`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{PatError, Result};
use crate::grid::{DataField, Field, Grid2D, ImageField};
use crate::par;

/// Default memory budget for the cached `cos(|k| t_m)` table.
pub const DEFAULT_TABLE_BYTES: usize = 128 << 20;

const RESEED: usize = 32;
const PAD_MARGIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Spectral,
    /// Slow quadrature over circular means; forward map only.
    SphericalMeanOracle,
}

/// Matrix-free discretisation of `U`, `A` and `A*` on a fixed grid.
#[derive(Clone)]
pub struct ForwardOperator {
    grid: Grid2D,
    backend: Backend,
    px: usize,
    py: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// `cos(pi q (k + 1/2) / py)`, shape `py x n_y`.
    dct: Vec<f64>,
    /// `|k|` for `p in 0..=px/2`, `q in 0..py`, row-major in `p`.
    omega: Vec<f64>,
    /// Optional cache of every propagator row, `[(p * py + q) * n_t + m]`.
    table: Option<Vec<f64>>,
    sqrt_y: Vec<f64>,
    inv_sqrt_t: Vec<f64>,
}

impl std::fmt::Debug for ForwardOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardOperator")
            .field("grid", &self.grid)
            .field("backend", &self.backend)
            .field("px", &self.px)
            .field("py", &self.py)
            .field("cached_table", &self.table.is_some())
            .finish()
    }
}

/// Smallest even `n >= min` whose only prime factors are 2, 3 and 5.
fn fast_even_size(min: usize) -> usize {
    let mut n = min.max(2);
    loop {
        if n % 2 == 0 {
            let mut m = n;
            for f in [2, 3, 5] {
                while m % f == 0 {
                    m /= f;
                }
            }
            if m == 1 {
                return n;
            }
        }
        n += 1;
    }
}

/// Writes `cos(omega * (m + 1/2) * dt)` for `m in 0..out.len()`, using a
/// rotation recurrence reseeded every few steps.
fn cosine_row(omega: f64, dt: f64, out: &mut [f64]) {
    let step = omega * dt;
    let (sr, cr) = step.sin_cos();
    let mut c = 0.0;
    let mut s = 0.0;
    for (m, slot) in out.iter_mut().enumerate() {
        if m % RESEED == 0 {
            let (sn, cn) = (omega * (m as f64 + 0.5) * dt).sin_cos();
            c = cn;
            s = sn;
        } else {
            let nc = c * cr - s * sr;
            s = s * cr + c * sr;
            c = nc;
        }
        *slot = c.clamp(-1.0, 1.0);
    }
}

impl ForwardOperator {
    pub fn new(grid: Grid2D, backend: Backend) -> Result<Self> {
        Self::with_table_budget(grid, backend, DEFAULT_TABLE_BYTES)
    }

    /// Like [`ForwardOperator::new`], caching the propagator table only if it
    /// fits in `bytes`; otherwise rows are regenerated on every application.
    pub fn with_table_budget(grid: Grid2D, backend: Backend, bytes: usize) -> Result<Self> {
        let d = grid.delta_x;
        let t_max = grid.t_max();
        let y_max = grid.y_extent().1;
        let px = fast_even_size(grid.n_x + (t_max / d).ceil() as usize + PAD_MARGIN);
        let py = fast_even_size(
            grid.n_y
                .max((0.5 * (t_max + y_max) / d).ceil() as usize + PAD_MARGIN),
        );
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(px);
        let ifft = planner.plan_fft_inverse(px);

        let n_y = grid.n_y;
        let mut dct = vec![0.0; py * n_y];
        for q in 0..py {
            for k in 0..n_y {
                dct[q * n_y + k] = (PI * q as f64 * (k as f64 + 0.5) / py as f64).cos();
            }
        }
        let np = px / 2 + 1;
        let mut omega = vec![0.0; np * py];
        for p in 0..np {
            let xi = 2.0 * PI * p as f64 / (px as f64 * d);
            for q in 0..py {
                let kappa = PI * q as f64 / (py as f64 * d);
                omega[p * py + q] = xi.hypot(kappa);
            }
        }
        let sqrt_y = (0..n_y).map(|k| grid.y_node(k).sqrt()).collect();
        let inv_sqrt_t = (0..grid.n_t).map(|m| 1.0 / grid.t_node(m).sqrt()).collect();

        let mut op = Self {
            grid,
            backend,
            px,
            py,
            fft,
            ifft,
            dct,
            omega,
            table: None,
            sqrt_y,
            inv_sqrt_t,
        };
        let entries = np * py * grid.n_t;
        if backend == Backend::Spectral && entries.saturating_mul(8) <= bytes {
            let n_t = grid.n_t;
            let mut table = vec![0.0; entries];
            par::for_each_chunk(&mut table, n_t, |row, out| {
                cosine_row(op.omega[row], grid.delta_t, out)
            });
            op.table = Some(table);
        }
        Ok(op)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Padded transform sizes `(P_x, P_y)`.
    pub fn padding(&self) -> (usize, usize) {
        (self.px, self.py)
    }

    /// `y_k^{1/2}` for every image row.
    pub fn depth_weights(&self) -> &[f64] {
        &self.sqrt_y
    }

    /// `t_m^{-1/2}` for every time sample.
    pub fn time_weights(&self) -> &[f64] {
        &self.inv_sqrt_t
    }

    pub fn has_cached_table(&self) -> bool {
        self.table.is_some()
    }

    /// The propagator row `cos(|k_pq| t_m)`, from the cache if present.
    pub fn propagator_row(&self, p: usize, q: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n_t];
        self.fill_row(p * self.py + q, &mut out);
        out
    }

    fn fill_row(&self, row: usize, out: &mut [f64]) {
        match &self.table {
            Some(t) => {
                let n_t = self.grid.n_t;
                out.copy_from_slice(&t[row * n_t..(row + 1) * n_t]);
            }
            None => cosine_row(self.omega[row], self.grid.delta_t, out),
        }
    }

    /// Unweighted value map `h -> u(x_i, 0, t_m)` of the spectral backend.
    fn spectral_u(&self, h: &Array2<f64>) -> Array2<f64> {
        let Grid2D { n_x, n_y, n_t, .. } = self.grid;
        let (px, py) = (self.px, self.py);
        let np = px / 2 + 1;

        // DCT-II along y into py cosine modes
        let mut hq = vec![0.0; n_x * py];
        par::for_each_chunk(&mut hq, py, |i, row| {
            let src = h.row(i);
            for (q, slot) in row.iter_mut().enumerate() {
                let c = &self.dct[q * n_y..(q + 1) * n_y];
                *slot = src.iter().zip(c).map(|(a, b)| a * b).sum();
            }
        });

        // zero-padded FFT along x, keeping p <= px/2
        let cols: Vec<Vec<Complex64>> = par::map_range(py, |q| {
            let mut buf = vec![Complex64::new(0.0, 0.0); px];
            for i in 0..n_x {
                buf[i].re = hq[i * py + q];
            }
            self.fft.process(&mut buf);
            buf.truncate(np);
            buf
        });

        // propagate and evaluate at y = 0
        let mut spec = vec![Complex64::new(0.0, 0.0); np * n_t];
        par::for_each_chunk(&mut spec, n_t, |p, acc| {
            let mut row = vec![0.0; n_t];
            for q in 0..py {
                let w = if q == 0 { 1.0 } else { 2.0 };
                let coef = cols[q][p] * w;
                self.fill_row(p * py + q, &mut row);
                for (a, &c) in acc.iter_mut().zip(&row) {
                    *a += coef * c;
                }
            }
        });

        // inverse FFT along x for every time node
        let scale = 1.0 / (px as f64 * py as f64);
        let mut out_t = vec![0.0; n_t * n_x];
        par::for_each_chunk(&mut out_t, n_x, |m, out| {
            let mut buf = vec![Complex64::new(0.0, 0.0); px];
            hermitian_fill(&mut buf, |p| spec[p * n_t + m]);
            self.ifft.process(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o = b.re * scale;
            }
        });
        Array2::from_shape_fn((n_x, n_t), |(i, m)| out_t[m * n_x + i])
    }

    /// Exact transpose of [`ForwardOperator::spectral_u`] as a value map.
    fn spectral_u_transpose(&self, g: &Array2<f64>) -> Array2<f64> {
        let Grid2D { n_x, n_y, n_t, .. } = self.grid;
        let (px, py) = (self.px, self.py);
        let np = px / 2 + 1;

        let mut dhat = vec![Complex64::new(0.0, 0.0); n_t * np];
        par::for_each_chunk(&mut dhat, np, |m, out| {
            let mut buf = vec![Complex64::new(0.0, 0.0); px];
            for i in 0..n_x {
                buf[i].re = g[[i, m]];
            }
            self.fft.process(&mut buf);
            out.copy_from_slice(&buf[..np]);
        });

        let mut b = vec![Complex64::new(0.0, 0.0); np * py];
        par::for_each_chunk(&mut b, py, |p, out| {
            let mut row = vec![0.0; n_t];
            for (q, slot) in out.iter_mut().enumerate() {
                self.fill_row(p * py + q, &mut row);
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, &c) in row.iter().enumerate() {
                    acc += dhat[m * np + p] * c;
                }
                *slot = acc;
            }
        });

        let mut gq = vec![0.0; py * n_x];
        par::for_each_chunk(&mut gq, n_x, |q, out| {
            let mut buf = vec![Complex64::new(0.0, 0.0); px];
            hermitian_fill(&mut buf, |p| b[p * py + q]);
            self.ifft.process(&mut buf);
            for (o, v) in out.iter_mut().zip(&buf) {
                *o = v.re;
            }
        });

        let scale = 1.0 / (px as f64 * py as f64);
        let mut out = vec![0.0; n_x * n_y];
        par::for_each_chunk(&mut out, n_y, |i, row| {
            for q in 0..py {
                let w = if q == 0 { 1.0 } else { 2.0 };
                let v = w * gq[q * n_x + i] * scale;
                let c = &self.dct[q * n_y..(q + 1) * n_y];
                for (r, &ck) in row.iter_mut().zip(c) {
                    *r += v * ck;
                }
            }
        });
        Array2::from_shape_vec((n_x, n_y), out).expect("shape")
    }

    fn oracle_u(&self, h: &ImageField) -> Array2<f64> {
        let g = self.grid;
        let d = g.delta_x;
        let t_max = g.t_max();
        let dr = 0.25 * d;
        let n_r = (t_max / dr).ceil() as usize + 4;
        let rows = par::map_range(g.n_x, |i| {
            let x = g.x_node(i);
            // mean over the even extension = twice the zero-extended mean
            let m: Vec<f64> = (0..n_r)
                .map(|j| {
                    let r = j as f64 * dr;
                    if j == 0 {
                        0.0
                    } else {
                        2.0 * spherical_mean_oracle(h, x, r)
                    }
                })
                .collect();
            let interp = |r: f64| -> f64 {
                let s = r / dr;
                let j = s.floor() as usize;
                if j + 1 >= n_r {
                    return 0.0;
                }
                let a = s - j as f64;
                m[j] * (1.0 - a) + m[j + 1] * a
            };
            // F(t) = t ∫_0^{pi/2} sin φ · m(t sin φ) dφ and u = F'(t)
            let big_f = |t: f64| -> f64 {
                let n_phi = 4 * ((PI * t / d).ceil() as usize) + 64;
                let hphi = 0.5 * PI / n_phi as f64;
                let mut acc = 0.0;
                for k in 0..n_phi {
                    let phi = (k as f64 + 0.5) * hphi;
                    acc += phi.sin() * interp(t * phi.sin());
                }
                t * acc * hphi
            };
            let eta = 0.25 * g.delta_t;
            (0..g.n_t)
                .map(|m_idx| {
                    let t = g.t_node(m_idx);
                    (big_f(t + eta) - big_f(t - eta)) / (2.0 * eta)
                })
                .collect::<Vec<f64>>()
        });
        Array2::from_shape_fn((g.n_x, g.n_t), |(i, m)| rows[i][m])
    }

    /// `U h`: pressure on the detector line.
    pub fn forward_u(&self, h: &ImageField) -> Result<DataField> {
        self.grid.ensure_same(h.grid())?;
        let values = match self.backend {
            Backend::Spectral => self.spectral_u(h.values()),
            Backend::SphericalMeanOracle => self.oracle_u(h),
        };
        DataField::new(self.grid, values)
    }

    /// `A f = t^{-1/2} U (y^{1/2} f)`.
    pub fn apply(&self, f: &ImageField) -> Result<DataField> {
        self.grid.ensure_same(f.grid())?;
        let mut weighted = f.values().clone();
        for mut row in weighted.rows_mut() {
            for (v, s) in row.iter_mut().zip(&self.sqrt_y) {
                *v *= s;
            }
        }
        let h = ImageField::new(self.grid, weighted)?;
        let mut u = self.forward_u(&h)?.into_values();
        for mut row in u.rows_mut() {
            for (v, s) in row.iter_mut().zip(&self.inv_sqrt_t) {
                *v *= s;
            }
        }
        DataField::new(self.grid, u)
    }

    /// `A* g`, the exact transpose of [`ForwardOperator::apply`] with respect
    /// to the weighted image and data inner products.
    pub fn adjoint(&self, g: &DataField) -> Result<ImageField> {
        self.grid.ensure_same(g.grid())?;
        if self.backend != Backend::Spectral {
            return Err(PatError::UnsupportedBackend("spherical-mean oracle"));
        }
        let mut d = g.values().clone();
        for mut row in d.rows_mut() {
            for (v, s) in row.iter_mut().zip(&self.inv_sqrt_t) {
                *v *= s;
            }
        }
        let mut out = self.spectral_u_transpose(&d);
        let ratio = self.grid.delta_t / self.grid.delta_x;
        for mut row in out.rows_mut() {
            for (v, s) in row.iter_mut().zip(&self.sqrt_y) {
                *v *= s * ratio;
            }
        }
        ImageField::new(self.grid, out)
    }
}

fn hermitian_fill(buf: &mut [Complex64], half: impl Fn(usize) -> Complex64) {
    let n = buf.len();
    for p in 0..=n / 2 {
        buf[p] = half(p);
    }
    for p in 1..(n + 1) / 2 {
        buf[n - p] = buf[p].conj();
    }
}

pub fn wave_forward_u(op: &ForwardOperator, h: &ImageField) -> Result<DataField> {
    op.forward_u(h)
}

pub fn op_a(op: &ForwardOperator, f: &ImageField) -> Result<DataField> {
    op.apply(f)
}

pub fn op_a_adjoint(op: &ForwardOperator, g: &DataField) -> Result<ImageField> {
    op.adjoint(g)
}

/// Mean of `f` over the circle of radius `r` about `(x, 0)`, sampled at
/// `4·ceil(pi r / dx)` equispaced points with bilinear interpolation.
/// Samples outside the grid (including `y < 0`) read as zero.
pub fn spherical_mean_oracle(f: &ImageField, x: f64, r: f64) -> f64 {
    let g = f.grid();
    let d = g.delta_x;
    let n = (4.0 * (PI * r / d).ceil()).max(4.0) as usize;
    let vals = f.values();
    let (x0, _) = g.x_extent();
    let sample = |px: f64, py: f64| -> f64 {
        // fractional index of cell centres
        let fi = (px - x0) / d - 0.5;
        let fk = py / d - 0.5;
        let i0 = fi.floor();
        let k0 = fk.floor();
        let a = fi - i0;
        let b = fk - k0;
        let mut acc = 0.0;
        for (di, wi) in [(0.0, 1.0 - a), (1.0, a)] {
            for (dk, wk) in [(0.0, 1.0 - b), (1.0, b)] {
                let ii = i0 + di;
                let kk = k0 + dk;
                if ii >= 0.0 && kk >= 0.0 && (ii as usize) < g.n_x && (kk as usize) < g.n_y {
                    acc += wi * wk * vals[[ii as usize, kk as usize]];
                }
            }
        }
        acc
    };
    let mut acc = 0.0;
    for j in 0..n {
        let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
        acc += sample(x + r * th.cos(), r * th.sin());
    }
    acc / n as f64
}

/// Field on the whole plane, stored on the half-space grid plus its mirror:
/// row `k` of `values` sits at `y = (k - n_y + 1/2)·dx` for `k in 0..2 n_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullPlaneField {
    grid: Grid2D,
    values: Array2<f64>,
}

impl FullPlaneField {
    pub fn new(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.n_x, 2 * grid.n_y) {
            return Err(PatError::ShapeMismatch(format!(
                "full-plane field must be {}x{}, got {:?}",
                grid.n_x,
                2 * grid.n_y,
                values.dim()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(PatError::NonFinite(pos));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let n_y = grid.n_y as f64;
        let values = Array2::from_shape_fn((grid.n_x, 2 * grid.n_y), |(i, k)| {
            f(grid.x_node(i), (k as f64 - n_y + 0.5) * grid.delta_x)
        });
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt() * self.grid.delta_x
    }
}

/// Upper half and the reflected lower half, both on the half-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceSplit {
    /// `P_+ f`.
    pub plus: ImageField,
    /// `S P_- f`, i.e. `f(x, -y)` for `y > 0`.
    pub minus: ImageField,
}

/// `(S f)(x, y) = f(x, -y)`.
pub fn reflect(f: &FullPlaneField) -> FullPlaneField {
    let mut values = f.values.clone();
    values.invert_axis(ndarray::Axis(1));
    FullPlaneField {
        grid: f.grid,
        values: values.as_standard_layout().to_owned(),
    }
}

pub fn extend_full_plane(f: &FullPlaneField) -> Result<HalfSpaceSplit> {
    let n_y = f.grid.n_y;
    let plus = f.values.slice(ndarray::s![.., n_y..]).to_owned();
    let mut minus = f.values.slice(ndarray::s![.., ..n_y]).to_owned();
    minus.invert_axis(ndarray::Axis(1));
    Ok(HalfSpaceSplit {
        plus: ImageField::new(f.grid, plus)?,
        minus: ImageField::new(f.grid, minus.as_standard_layout().to_owned())?,
    })
}

/// Full-plane extension: the pair `(A P_+ f, A S P_- f)`. Its squared norm
/// is the sum of the two trace norms.
pub fn op_a_full(op: &ForwardOperator, f: &FullPlaneField) -> Result<(DataField, DataField)> {
    op.grid().ensure_same(f.grid())?;
    let split = extend_full_plane(f)?;
    Ok((op.apply(&split.plus)?, op.apply(&split.minus)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid(n: usize) -> Grid2D {
        Grid2D::new(n, n, 2 * n, 1.0 / n as f64, 0.5 / n as f64).unwrap()
    }

    #[test]
    fn fast_sizes() {
        assert_eq!(fast_even_size(7), 8);
        assert_eq!(fast_even_size(264), 270);
        assert_eq!(fast_even_size(31), 32);
        assert_eq!(fast_even_size(11), 12);
    }

    #[test]
    fn cosine_row_matches_direct() {
        let mut row = vec![0.0; 500];
        cosine_row(37.3, 0.01, &mut row);
        for (m, &c) in row.iter().enumerate() {
            let want = (37.3 * (m as f64 + 0.5) * 0.01).cos();
            assert!((c - want).abs() < 1e-13);
        }
    }

    #[test]
    fn table_and_on_the_fly_agree() {
        let g = small_grid(16);
        let cached = ForwardOperator::new(g, Backend::Spectral).unwrap();
        let lazy = ForwardOperator::with_table_budget(g, Backend::Spectral, 0).unwrap();
        assert!(cached.has_cached_table());
        assert!(!lazy.has_cached_table());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let a = cached.apply(&f).unwrap();
        let b = lazy.apply(&f).unwrap();
        assert_eq!(a, b);
        let (px, py) = cached.padding();
        for p in [0, px / 4, px / 2] {
            for q in [0, py / 2, py - 1] {
                assert!(cached.propagator_row(p, q).iter().all(|c| c.abs() <= 1.0));
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = small_grid(16);
        let op = ForwardOperator::new(g, Backend::Spectral).unwrap();
        let z = op.apply(&ImageField::zeros(g)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let z = op.adjoint(&DataField::zeros(g)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dot_product_test() {
        let g = Grid2D::new(16, 16, 32, 1.0 / 16.0, 1.0 / 32.0).unwrap();
        let op = ForwardOperator::new(g, Backend::Spectral).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let d = DataField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let af = op.apply(&f).unwrap();
        let lhs = inner_product(&af, &d).unwrap();
        let rhs = inner_product(&f, &op.adjoint(&d).unwrap()).unwrap();
        assert!((lhs - rhs).abs() / (norm(&af) * norm(&d)) < 1e-10);
    }

    #[test]
    fn scaling_is_exact() {
        let g = small_grid(16);
        let op = ForwardOperator::new(g, Backend::Spectral).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let a = op.apply(&f).unwrap();
        let b = op.apply(&f.scaled(3.0)).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((3.0 * x - y).abs() <= 1e-12 * x.abs().max(1e-3));
        }
    }

    #[test]
    fn oracle_rejects_adjoint() {
        let g = small_grid(16);
        let op = ForwardOperator::new(g, Backend::SphericalMeanOracle).unwrap();
        assert!(matches!(
            op.adjoint(&DataField::zeros(g)),
            Err(PatError::UnsupportedBackend(_))
        ));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let op = ForwardOperator::new(small_grid(16), Backend::Spectral).unwrap();
        let other = small_grid(32);
        assert!(matches!(
            op.apply(&ImageField::zeros(other)),
            Err(PatError::GridMismatch(_))
        ));
    }

    #[test]
    fn spherical_mean_examples() {
        let g = Grid2D::new(64, 64, 2, 1.0 / 16.0, 0.1).unwrap();
        let c = ImageField::from_fn(g, |_, _| 2.5).unwrap();
        // circle about (0, 0) that stays inside the upper grid is impossible,
        // so check the constant on the upper half only: mean = c / 2
        let m = spherical_mean_oracle(&c, 0.0, 1.0);
        assert!((m - 1.25).abs() < 1e-3, "{m}");

        let disk = ImageField::from_fn(g, |x, y| {
            if x * x + y * y < 1.5 * 1.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let m = spherical_mean_oracle(&disk, 0.0, 0.7);
        assert!((m - 0.5).abs() < 1e-3, "{m}");
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = small_grid(8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = FullPlaneField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        assert_eq!(reflect(&reflect(&f)), f);
        let r = reflect(&f);
        let n_y = g.n_y;
        assert_eq!(r.values()[[2, 0]], f.values()[[2, 2 * n_y - 1]]);
    }

    #[test]
    fn full_plane_split() {
        let g = small_grid(16);
        let op = ForwardOperator::new(g, Backend::Spectral).unwrap();
        let upper = FullPlaneField::from_fn(g, |x, y| if y > 0.0 { (x + y).sin() } else { 0.0 }).unwrap();
        let (_, lower) = op_a_full(&op, &upper).unwrap();
        assert!(lower.values().iter().all(|&v| v == 0.0));

        let even = FullPlaneField::from_fn(g, |x, y| (-(x * x + (y.abs() - 0.4).powi(2)) * 20.0).exp()).unwrap();
        let (a, b) = op_a_full(&op, &even).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).abs() <= 1e-12 * norm(&a));
        }
    }
}
