//! Wavelet/vaguelette pictures, a vaguelette Gram matrix and the
//! machine-precision invariants on the default grid.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pat_core::dwt::{basis_image, dwt2_forward, dwt2_inverse, WaveletFamily, WaveletIndex, WaveletSpec};
use pat_core::grid::{inner_product, norm, ImageField};
use pat_core::io::{write_data, write_image, write_pgm};
use pat_core::simulation::{default_grid, isometry_phantom, make_phantom, white_noise};
use pat_core::vaguelette::{synthesize_vaguelette, vaguelette_gram};
use pat_core::wave::{Backend, ForwardOperator};

use crate::commands::ensure_dir;
use crate::error::{CliError, CliResult};

pub const DOT_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-10;

/// Levels and orientations of the emitted wavelet/vaguelette pairs.
pub const PAIR_LEVELS: [usize; 2] = [2, 3];

/// Depth-oscillating wavelets at mid scales under the detector centre.
pub fn gram_indices() -> Vec<WaveletIndex> {
    vec![
        WaveletIndex::detail(2, 2, 8, 1),
        WaveletIndex::detail(2, 2, 8, 3),
        WaveletIndex::detail(2, 2, 6, 2),
        WaveletIndex::detail(2, 2, 10, 2),
        WaveletIndex::detail(3, 2, 16, 2),
        WaveletIndex::detail(3, 2, 20, 3),
        WaveletIndex::detail(3, 2, 13, 4),
        WaveletIndex::detail(3, 2, 16, 6),
    ]
}

/// Deterministic values in `[-1, 1)` from a 64-bit mix of the cell index.
fn hashed_image(grid: pat_core::grid::Grid2D, seed: u64) -> CliResult<ImageField> {
    let mut values = ndarray::Array2::zeros(grid.image_shape());
    for ((i, k), v) in values.indexed_iter_mut() {
        let mut z = seed ^ ((i as u64) << 32 | k as u64);
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        *v = (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0;
    }
    Ok(ImageField::new(grid, values)?)
}

struct Line {
    name: &'static str,
    gating: bool,
    ok: bool,
    detail: String,
}

pub fn diagnose(dir: &Path) -> CliResult<()> {
    ensure_dir(dir)?;
    let grid = default_grid();
    let op = ForwardOperator::new(grid, Backend::Spectral)?;
    let spec = WaveletSpec::new(WaveletFamily::Daubechies(4), 4)?;

    for level in PAIR_LEVELS {
        let band = (grid.n_x >> spec.levels) << (level - 1);
        for orientation in 1..=3u8 {
            let idx = WaveletIndex::detail(level, orientation, band / 2, band / 8);
            let stem = format!("j{level}_o{orientation}");
            let psi = basis_image(grid, &spec, idx)?;
            let u = synthesize_vaguelette(&op, idx, &spec)?;
            write_image(dir.join(format!("wavelet_{stem}.pgf1")), &psi)?;
            write_pgm(dir.join(format!("wavelet_{stem}.pgm")), &psi)?;
            write_data(dir.join(format!("vaguelette_{stem}.pgf1")), &u)?;
            write_pgm(dir.join(format!("vaguelette_{stem}.pgm")), &u)?;
        }
    }

    let idx = gram_indices();
    let gram = vaguelette_gram(&op, &spec, &idx)?;
    let mut csv = String::from("row,col,level_a,orientation_a,kx_a,ky_a,level_b,orientation_b,kx_b,ky_b,value\n");
    for (a, ia) in idx.iter().enumerate() {
        for (b, ib) in idx.iter().enumerate() {
            writeln!(
                csv,
                "{a},{b},{},{},{},{},{},{},{},{},{:.12e}",
                ia.level, ia.orientation, ia.kx, ia.ky, ib.level, ib.orientation, ib.kx, ib.ky, gram[[a, b]]
            )
            .expect("write to string");
        }
    }
    let gram_path = dir.join("gram.csv");
    fs::write(&gram_path, csv).map_err(|e| CliError::io(format!("cannot write {}: {e}", gram_path.display())))?;
    let diag: Vec<f64> = (0..idx.len()).map(|a| gram[[a, a]]).collect();
    let diag_min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let diag_max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut off_max = 0.0f64;
    for a in 0..idx.len() {
        for b in 0..a {
            off_max = off_max.max(gram[[a, b]].abs());
        }
    }

    let mut dot = 0.0f64;
    for seed in 0..3u64 {
        let f = hashed_image(grid, seed)?;
        let g = white_noise(grid, 1.0, seed)?;
        let lhs = inner_product(&op.apply(&f)?, &g)?;
        let rhs = inner_product(&f, &op.adjoint(&g)?)?;
        dot = dot.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }

    let f = hashed_image(grid, 99)?;
    let c = dwt2_forward(&f, &spec)?;
    let back = dwt2_inverse(&c)?;
    let round_trip = norm(&back.sub(&f)?) / norm(&f);
    let parseval = (c.norm_sq() - norm(&f).powi(2)).abs() / norm(&f).powi(2);

    let phantom = make_phantom(&isometry_phantom(grid))?;
    let ratio = norm(&op.apply(&phantom)?) / norm(&phantom);

    let lines = [
        Line {
            name: "adjoint dot test",
            gating: true,
            ok: dot <= DOT_TOL,
            detail: format!("defect {dot:.2e} (tol {DOT_TOL:e})"),
        },
        Line {
            name: "dwt round trip",
            gating: true,
            ok: round_trip <= ROUND_TRIP_TOL && parseval <= ROUND_TRIP_TOL,
            detail: format!("error {round_trip:.2e}, Parseval {parseval:.2e} (tol {ROUND_TRIP_TOL:e})"),
        },
        Line {
            name: "vaguelette gram",
            gating: false,
            ok: true,
            detail: format!("diagonal [{diag_min:.4}, {diag_max:.4}], max off-diagonal {off_max:.4}"),
        },
        Line {
            name: "isometry",
            gating: false,
            ok: true,
            detail: format!("||Af||/||f|| = {ratio:.4} on the isometry phantom"),
        },
    ];
    let mut report = String::new();
    for l in &lines {
        let tag = match (l.gating, l.ok) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        writeln!(report, "{tag} {}: {}", l.name, l.detail).expect("write to string");
    }
    print!("{report}");
    let report_path = dir.join("invariants.txt");
    fs::write(&report_path, &report)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", report_path.display())))?;
    let failed: Vec<&str> = lines.iter().filter(|l| l.gating && !l.ok).map(|l| l.name).collect();
    if !failed.is_empty() {
        return Err(CliError::invariant(format!("invariant failure: {}", failed.join(", "))));
    }
    Ok(())
}
