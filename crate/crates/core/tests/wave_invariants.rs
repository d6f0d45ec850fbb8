mod common;

use pat_core::grid::{inner_product, norm, Field, Grid2D, ImageField};
use pat_core::wave::{Backend, ForwardOperator};

fn gaussian(grid: Grid2D, cx: f64, cy: f64, s: f64, cutoff: f64) -> ImageField {
    ImageField::from_fn(grid, |x, y| {
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        if r2.sqrt() < cutoff {
            (-r2 / (2.0 * s * s)).exp()
        } else {
            0.0
        }
    })
    .unwrap()
}

#[test]
fn adjoint_dot_test_on_rectangular_grid() {
    let grid = Grid2D::new(32, 64, 64, 0.1, 0.05).unwrap();
    let op = ForwardOperator::new(grid, Backend::Spectral).unwrap();
    for seed in 0..5 {
        let f = common::random_image(grid, seed);
        let g = common::random_data(grid, 100 + seed);
        let lhs = inner_product(&op.apply(&f).unwrap(), &g).unwrap();
        let rhs = inner_product(&f, &op.adjoint(&g).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()), "{lhs} {rhs}");
    }
}

#[test]
fn first_arrival_at_source_depth() {
    let grid = Grid2D::square(64, 4.0, 256, 4.0).unwrap();
    let op = ForwardOperator::new(grid, Backend::Spectral).unwrap();
    let f = gaussian(grid, 0.0, 0.5, 0.03, f64::INFINITY);
    let g = op.forward_u(&f).unwrap();
    let i0 = grid.n_x / 2;
    let trace = g.values().row(i0);
    let m_peak = (0..grid.n_t)
        .max_by(|&a, &b| trace[a].abs().partial_cmp(&trace[b].abs()).unwrap())
        .unwrap();
    let t_peak = grid.t_node(m_peak);
    let dist = grid.x_node(i0).hypot(0.5);
    assert!((t_peak - dist).abs() <= 2.0 * grid.delta_t, "peak at {t_peak}, source at {dist}");
}

#[test]
fn nothing_arrives_before_the_wavefront() {
    let grid = Grid2D::square(128, 4.0, 256, 4.0).unwrap();
    let op = ForwardOperator::new(grid, Backend::Spectral).unwrap();
    let s = 3.0 * grid.delta_x;
    let cutoff = 7.4 * s;
    let (cx, cy) = (0.0, 1.4);
    let g = op.forward_u(&gaussian(grid, cx, cy, s, cutoff)).unwrap();
    let peak = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut early = 0.0f64;
    for ((i, m), v) in g.values().indexed_iter() {
        let reach = (grid.x_node(i) - cx).hypot(cy) - cutoff;
        if grid.t_node(m) < reach - 2.0 * grid.delta_t {
            early = early.max(v.abs());
        }
    }
    assert!(early <= 1e-8 * peak, "leak {early:e} vs peak {peak:e}");
}

#[test]
fn spectral_matches_spherical_mean_oracle() {
    let grid = Grid2D::square(64, 4.0, 128, 4.0).unwrap();
    let spectral = ForwardOperator::new(grid, Backend::Spectral).unwrap();
    let oracle = ForwardOperator::new(grid, Backend::SphericalMeanOracle).unwrap();
    // disk of radius 0.3 with a tanh edge of width 0.15
    let f = ImageField::from_fn(grid, |x, y| {
        let r = x.hypot(y - 0.8);
        0.5 * (1.0 - ((r - 0.3) / 0.15).tanh())
    })
    .unwrap();
    let a = spectral.forward_u(&f).unwrap();
    let b = oracle.forward_u(&f).unwrap();
    let rel = norm(&a.sub(&b).unwrap()) / norm(&b);
    assert!(rel <= 0.02, "{rel}");
}

#[test]
fn oracle_has_no_adjoint() {
    let grid = Grid2D::square(16, 4.0, 32, 4.0).unwrap();
    let oracle = ForwardOperator::new(grid, Backend::SphericalMeanOracle).unwrap();
    let g = common::random_data(grid, 1);
    assert!(oracle.adjoint(&g).is_err());
}

#[test]
fn isometry_ratio_in_visible_cone() {
    // shallow centred disk: ||Af|| / ||f|| close to sqrt((2/pi) atan(X / y))
    let grid = Grid2D::square(64, 4.0, 256, 4.0).unwrap();
    let op = ForwardOperator::new(grid, Backend::Spectral).unwrap();
    let f = gaussian(grid, 0.0, 0.6, 0.08, f64::INFINITY);
    let ratio = norm(&op.apply(&f).unwrap()) / norm(&f);
    let want = ((2.0 / std::f64::consts::PI) * (2.0f64 / 0.6).atan()).sqrt();
    assert!((ratio - want).abs() <= 0.02, "{ratio} vs {want}");
    assert!(f.values().iter().all(|v| v.is_finite()));
}
