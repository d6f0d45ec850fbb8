//! Iterative soft thresholding on `1/2 ||A f - g||² + sum w_j |<psi_lambda, f>|`.

use crate::dwt::{dwt2_forward, dwt2_inverse, WaveletSpec};
use crate::error::{PatError, Result};
use crate::grid::{norm, DataField, ImageField};
use crate::wave::ForwardOperator;

use super::threshold::ThresholdSchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IstaConfig {
    pub max_iters: usize,
    /// Stop once `||f_{k+1} - f_k|| <= tol · ||f_{k+1}||`.
    pub tol: f64,
    pub step: f64,
}

impl Default for IstaConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-9,
            step: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IstaOutcome {
    pub image: ImageField,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted iterate, starting at `f = 0`.
    pub objective: Vec<f64>,
}

/// The l1-Tikhonov functional at `f`.
pub fn l1_tikhonov_objective(
    op: &ForwardOperator,
    g: &DataField,
    f: &ImageField,
    sched: &ThresholdSchedule,
    spec: &WaveletSpec,
) -> Result<f64> {
    let r = op.apply(f)?.sub(g)?;
    let c = dwt2_forward(f, spec)?;
    Ok(0.5 * norm(&r).powi(2) + sched.weighted_l1(&c))
}

pub fn ista_run(
    op: &ForwardOperator,
    g: &DataField,
    sched: &ThresholdSchedule,
    spec: &WaveletSpec,
    cfg: &IstaConfig,
) -> Result<IstaOutcome> {
    sched.check(spec)?;
    if !(cfg.step > 0.0 && cfg.tol > 0.0) {
        return Err(PatError::InvalidParams("ISTA step and tolerance must be positive".into()));
    }
    let grid = *op.grid();
    let mut f = ImageField::zeros(grid);
    let mut phi = l1_tikhonov_objective(op, g, &f, sched, spec)?;
    let mut objective = vec![phi];
    let mut step = cfg.step;
    let mut change = f64::INFINITY;
    for k in 1..=cfg.max_iters {
        let grad = op.adjoint(&op.apply(&f)?.sub(g)?)?;
        let (next, next_phi) = loop {
            let z = f.sub(&grad.scaled(step))?;
            let mut c = dwt2_forward(&z, spec)?;
            let scaled = sched.scaled(step)?;
            scaled.apply(&mut c);
            let cand = dwt2_inverse(&c)?;
            let cand_phi = l1_tikhonov_objective(op, g, &cand, sched, spec)?;
            if cand_phi <= phi * (1.0 + 1e-13) + 1e-300 || step < 1e-6 {
                break (cand, cand_phi);
            }
            step *= 0.5;
        };
        change = norm(&next.sub(&f)?);
        let scale = norm(&next).max(f64::MIN_POSITIVE);
        f = next;
        phi = next_phi;
        objective.push(phi);
        if change <= cfg.tol * scale {
            return Ok(IstaOutcome {
                image: f,
                iterations: k,
                converged: true,
                objective,
            });
        }
    }
    let residual = change / norm(&f).max(f64::MIN_POSITIVE);
    Err(PatError::NotConverged {
        solver: "ista",
        iterations: cfg.max_iters,
        residual,
    })
}

/// Minimiser of the l1-Tikhonov functional by plain ISTA with step 1.
pub fn ista_oracle(
    op: &ForwardOperator,
    g: &DataField,
    sched: &ThresholdSchedule,
    spec: &WaveletSpec,
    iters: usize,
) -> Result<ImageField> {
    let cfg = IstaConfig {
        max_iters: iters,
        ..IstaConfig::default()
    };
    Ok(ista_run(op, g, sched, spec, &cfg)?.image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwt::WaveletFamily;
    use crate::grid::Grid2D;
    use crate::simulation::white_noise;
    use crate::wave::Backend;

    #[test]
    fn objective_never_increases() {
        let g = Grid2D::square(16, 4.0, 32, 4.0).unwrap();
        let op = ForwardOperator::new(g, Backend::Spectral).unwrap();
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(2), 2).unwrap();
        let data = white_noise(g, 1.0, 11).unwrap();
        let sched = ThresholdSchedule::zero_coarse(0.002, 2).unwrap();
        let cfg = IstaConfig {
            max_iters: 40,
            tol: 1e-30,
            step: 1.0,
        };
        let err = ista_run(&op, &data, &sched, &spec, &cfg).unwrap_err();
        assert!(matches!(err, PatError::NotConverged { solver: "ista", iterations: 40, .. }));

        let cfg = IstaConfig {
            max_iters: 3000,
            tol: 1e-4,
            step: 1.0,
        };
        let out = ista_run(&op, &data, &sched, &spec, &cfg).unwrap();
        assert!(out.converged);
        for w in out.objective.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}
