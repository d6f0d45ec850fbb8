//! Vaguelette coefficients `<u_lambda, g>` with `u_lambda = A psi_lambda`.
//!
//! Coefficients are computed as `W A* g` (two fast transforms); the
//! vaguelettes themselves are only materialised for diagnostics.

use ndarray::Array2;

use crate::dwt::{basis_image, dwt2_forward, dwt2_inverse, WaveletIndex, WaveletPyramid, WaveletSpec};
use crate::error::Result;
use crate::grid::{inner_product, DataField, Field, ImageField};
use crate::par;
use crate::wave::ForwardOperator;

/// Vaguelette coefficients, indexed exactly like the wavelet pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct VagueletteCoeffs {
    pub pyramid: WaveletPyramid,
}

impl VagueletteCoeffs {
    pub fn get(&self, idx: WaveletIndex) -> Result<f64> {
        self.pyramid.get(idx)
    }

    pub fn into_pyramid(self) -> WaveletPyramid {
        self.pyramid
    }
}

pub fn vaguelette_transform(
    op: &ForwardOperator,
    g: &DataField,
    spec: &WaveletSpec,
) -> Result<VagueletteCoeffs> {
    let back = op.adjoint(g)?;
    Ok(VagueletteCoeffs {
        pyramid: dwt2_forward(&back, spec)?,
    })
}

/// `u_lambda = A psi_lambda`.
pub fn synthesize_vaguelette(
    op: &ForwardOperator,
    idx: WaveletIndex,
    spec: &WaveletSpec,
) -> Result<DataField> {
    let psi = basis_image(*op.grid(), spec, idx)?;
    op.apply(&psi)
}

/// `sum_lambda <g, u_lambda> psi_lambda`; coincides with `A* g`.
pub fn wvd_reconstruct_exact(
    op: &ForwardOperator,
    g: &DataField,
    spec: &WaveletSpec,
) -> Result<ImageField> {
    dwt2_inverse(&vaguelette_transform(op, g, spec)?.pyramid)
}

/// Inversion for unweighted pressure data `g_U = U h`:
/// `h = y^{1/2} · wvd_reconstruct_exact(t^{-1/2} g_U)`.
pub fn wvd_reconstruct_u_data(
    op: &ForwardOperator,
    g_u: &DataField,
    spec: &WaveletSpec,
) -> Result<ImageField> {
    let mut weighted = g_u.values().clone();
    for mut row in weighted.rows_mut() {
        for (v, w) in row.iter_mut().zip(op.time_weights()) {
            *v *= w;
        }
    }
    let f = wvd_reconstruct_exact(op, &g_u.with_values(weighted)?, spec)?;
    let mut h = f.into_values();
    for mut row in h.rows_mut() {
        for (v, w) in row.iter_mut().zip(op.depth_weights()) {
            *v *= w;
        }
    }
    ImageField::new(*op.grid(), h)
}

/// Data-domain Gram matrix `<u_a, u_b>` of the given vaguelettes.
pub fn vaguelette_gram(
    op: &ForwardOperator,
    spec: &WaveletSpec,
    indices: &[WaveletIndex],
) -> Result<Array2<f64>> {
    let traces = par::map_range(indices.len(), |i| synthesize_vaguelette(op, indices[i], spec));
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
    let n = indices.len();
    let mut gram = Array2::zeros((n, n));
    for a in 0..n {
        for b in a..n {
            let v = inner_product(&traces[a], &traces[b])?;
            gram[[a, b]] = v;
            gram[[b, a]] = v;
        }
    }
    Ok(gram)
}

/// How strongly `W A* A psi_lambda` concentrates at `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentration {
    pub index: WaveletIndex,
    pub diagonal: f64,
    pub max_off_diagonal: f64,
}

pub fn vaguelette_concentration(
    op: &ForwardOperator,
    spec: &WaveletSpec,
    idx: WaveletIndex,
) -> Result<Concentration> {
    let u = synthesize_vaguelette(op, idx, spec)?;
    let c = vaguelette_transform(op, &u, spec)?;
    let diagonal = c.get(idx)?;
    let mut max_off: f64 = 0.0;
    for other in c.pyramid.indices() {
        if other != idx {
            max_off = max_off.max(c.get(other)?.abs());
        }
    }
    Ok(Concentration {
        index: idx,
        diagonal,
        max_off_diagonal: max_off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwt::WaveletFamily;
    use crate::grid::{norm, Grid2D};
    use crate::wave::Backend;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (ForwardOperator, WaveletSpec) {
        let g = Grid2D::square(n, 4.0, 2 * n, 4.0).unwrap();
        (
            ForwardOperator::new(g, Backend::Spectral).unwrap(),
            WaveletSpec::new(WaveletFamily::Daubechies(4), 3).unwrap(),
        )
    }

    fn random_data(op: &ForwardOperator, seed: u64) -> DataField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataField::from_fn(*op.grid(), |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn zero_data_zero_coefficients() {
        let (op, spec) = setup(16);
        let c = vaguelette_transform(&op, &DataField::zeros(*op.grid()), &spec).unwrap();
        assert_eq!(c.pyramid.max_abs(), 0.0);
        let r = wvd_reconstruct_u_data(&op, &DataField::zeros(*op.grid()), &spec).unwrap();
        assert_eq!(norm(&r), 0.0);
    }

    #[test]
    fn exact_reconstruction_is_the_adjoint() {
        let (op, spec) = setup(32);
        let g = random_data(&op, 5);
        let a = wvd_reconstruct_exact(&op, &g, &spec).unwrap();
        let b = op.adjoint(&g).unwrap();
        assert!(norm(&a.sub(&b).unwrap()) <= 1e-10 * norm(&b));
    }

    #[test]
    fn transform_is_linear() {
        let (op, spec) = setup(16);
        let g1 = random_data(&op, 1);
        let g2 = random_data(&op, 2);
        let combo = g1.scaled(0.7).add(&g2.scaled(-1.3)).unwrap();
        let c = vaguelette_transform(&op, &combo, &spec).unwrap().pyramid.to_flat();
        let c1 = vaguelette_transform(&op, &g1, &spec).unwrap().pyramid.to_flat();
        let c2 = vaguelette_transform(&op, &g2, &spec).unwrap().pyramid.to_flat();
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((a, b), d) in c.iter().zip(&c1).zip(&c2) {
            assert!((a - (0.7 * b - 1.3 * d)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn u_data_inversion_unwinds() {
        let (op, spec) = setup(16);
        let g = random_data(&op, 8);
        // g_U = t^{1/2} g
        let mut gu = g.values().clone();
        for mut row in gu.rows_mut() {
            for (v, w) in row.iter_mut().zip(op.time_weights()) {
                *v /= w;
            }
        }
        let gu = g.with_values(gu).unwrap();
        let lhs = wvd_reconstruct_u_data(&op, &gu, &spec).unwrap();
        let mut rhs = wvd_reconstruct_exact(&op, &g, &spec).unwrap().into_values();
        for mut row in rhs.rows_mut() {
            for (v, w) in row.iter_mut().zip(op.depth_weights()) {
                *v *= w;
            }
        }
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in lhs.values().iter().zip(&rhs) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn gram_is_symmetric_with_positive_diagonal() {
        let (op, spec) = setup(32);
        let idx = [
            WaveletIndex::detail(2, 2, 4, 1),
            WaveletIndex::detail(2, 3, 4, 1),
            WaveletIndex::detail(3, 2, 8, 2),
        ];
        let gram = vaguelette_gram(&op, &spec, &idx).unwrap();
        for a in 0..3 {
            assert!(gram[[a, a]] > 0.0, "{gram:?}");
            for b in 0..3 {
                assert_eq!(gram[[a, b]], gram[[b, a]]);
                if a != b {
                    assert!(gram[[a, b]].abs() < 0.1 * gram[[a, a]].min(gram[[b, b]]), "{gram:?}");
                }
            }
        }
    }
}
