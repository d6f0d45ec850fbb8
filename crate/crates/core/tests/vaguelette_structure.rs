mod common;

use pat_core::dwt::{WaveletFamily, WaveletIndex, WaveletSpec};
use pat_core::grid::{norm, Field};
use pat_core::simulation::default_grid;
use pat_core::vaguelette::{vaguelette_concentration, vaguelette_gram, wvd_reconstruct_exact};
use pat_core::wave::{Backend, ForwardOperator};
use rand::seq::SliceRandom;

fn setup() -> (ForwardOperator, WaveletSpec) {
    let op = ForwardOperator::new(default_grid(), Backend::Spectral).unwrap();
    (op, WaveletSpec::new(WaveletFamily::Daubechies(4), 4).unwrap())
}

/// Wavelets oscillating in depth, at mid scales, under the detector centre:
/// their wavefront normals hit the aperture.
fn visible() -> Vec<WaveletIndex> {
    let mut out = Vec::new();
    for (level, kxs, kys) in [(2, 6..11, 1..4), (3, 12..21, 2..7)] {
        for kx in kxs {
            for ky in kys.clone() {
                out.push(WaveletIndex::detail(level, 2, kx, ky));
            }
        }
    }
    out
}

#[test]
fn visible_vaguelettes_concentrate() {
    let (op, spec) = setup();
    for idx in [
        WaveletIndex::detail(2, 2, 8, 1),
        WaveletIndex::detail(2, 2, 8, 3),
        WaveletIndex::detail(3, 2, 16, 2),
        WaveletIndex::detail(3, 2, 20, 3),
        WaveletIndex::detail(3, 3, 16, 2),
    ] {
        let c = vaguelette_concentration(&op, &spec, idx).unwrap();
        assert!((c.diagonal - 1.0).abs() <= 0.05, "{c:?}");
        assert!(c.max_off_diagonal <= 0.05, "{c:?}");
    }
}

#[test]
fn visible_vaguelettes_nearly_orthonormal() {
    let (op, spec) = setup();
    let mut pool = visible();
    pool.shuffle(&mut common::rng(17));
    let idx: Vec<WaveletIndex> = pool.into_iter().take(21).collect();
    let gram = vaguelette_gram(&op, &spec, &idx).unwrap();
    for a in 0..idx.len() {
        assert!((gram[[a, a]] - 1.0).abs() <= 0.05, "{:?}: {}", idx[a], gram[[a, a]]);
        for b in 0..a {
            assert!(gram[[a, b]].abs() <= 0.05, "{:?} {:?}: {}", idx[a], idx[b], gram[[a, b]]);
        }
    }
}

#[test]
fn invisible_orientation_loses_energy() {
    // horizontal oscillation under the centre has horizontal wavefront
    // normals, which never meet the detector line
    let (op, spec) = setup();
    let c = vaguelette_concentration(&op, &spec, WaveletIndex::detail(2, 1, 8, 2)).unwrap();
    assert!(c.diagonal < 0.5, "{c:?}");
}

#[test]
fn exact_reconstruction_is_the_adjoint() {
    let (op, spec) = setup();
    let g = common::random_data(*op.grid(), 3);
    let a = wvd_reconstruct_exact(&op, &g, &spec).unwrap();
    let b = op.adjoint(&g).unwrap();
    assert!(norm(&a.sub(&b).unwrap()) <= 1e-10 * norm(&b));
    assert!(a.values().iter().all(|v| v.is_finite()));
}
