//! Hybrid vaguelette-TV reconstruction:
//! `min TV(f)` subject to `||W(A* g - f)||_inf <= q`, solved by ADMM on the
//! split `f + v = A* g`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dwt::{dwt2_forward, dwt2_inverse, WaveletSpec};
use crate::error::{PatError, Result};
use crate::grid::{norm, DataField, Field, ImageField};
use crate::wave::ForwardOperator;

use super::tv::{chambolle, tv_of_values, TvDual};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmConfig {
    /// Penalty `c` of the augmented Lagrangian.
    pub c: f64,
    pub max_iters: usize,
    pub feasibility_tol: f64,
    pub tv_inner_iters: usize,
    pub tv_inner_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            c: 0.03,
            max_iters: 200,
            feasibility_tol: 1e-3,
            tv_inner_iters: 100,
            tv_inner_tol: 1e-4,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(PatError::InvalidParams(format!("ADMM penalty c = {} must be positive", self.c)));
        }
        if self.max_iters == 0 || self.tv_inner_iters == 0 {
            return Err(PatError::InvalidParams("iteration budgets must be positive".into()));
        }
        if !(self.feasibility_tol > 0.0 && self.tv_inner_tol > 0.0) {
            return Err(PatError::InvalidParams("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the estimator log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmRecord {
    pub iteration: usize,
    /// `||f + v - A* g||` in L².
    pub primal_residual: f64,
    /// `max |W(A* g - f)| / q`.
    pub feasibility: f64,
    pub tv: f64,
    pub inner_iterations: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub image: ImageField,
    pub iterations: usize,
    pub converged: bool,
    pub feasibility: f64,
    pub history: Vec<AdmmRecord>,
}

/// ADMM on an already back-projected image `A* g`. Always returns the last
/// iterate; `converged` reports whether the stopping rule fired.
pub fn hybrid_tv_from_backprojection(
    back: &ImageField,
    q: f64,
    spec: &WaveletSpec,
    cfg: &AdmmConfig,
) -> Result<AdmmOutcome> {
    cfg.validate()?;
    if !(q >= 0.0 && q.is_finite()) {
        return Err(PatError::InvalidParams(format!("constraint level q = {q} must be >= 0")));
    }
    if q == 0.0 {
        // the feasible set is the single point A* g
        return Ok(AdmmOutcome {
            image: back.clone(),
            iterations: 0,
            converged: true,
            feasibility: 0.0,
            history: Vec::new(),
        });
    }
    let start = Instant::now();
    let bg = back.values();
    let shape = bg.dim();
    let c = cfg.c;
    let mut f = ndarray::Array2::<f64>::zeros(shape);
    let mut v = ndarray::Array2::<f64>::zeros(shape);
    let mut mu = ndarray::Array2::<f64>::zeros(shape);
    let mut dual = TvDual::zeros(shape);
    let mut history = Vec::new();
    let mut feasibility = f64::INFINITY;

    for k in 1..=cfg.max_iters {
        // f-update: TV prox of Bg - v - c·mu
        let target = bg - &v - &(&mu * c);
        let solve = chambolle(&target, c, cfg.tv_inner_iters, cfg.tv_inner_tol, Some(dual));
        dual = solve.dual;
        let f_next = solve.values;

        // v-update: projection onto {||W v||_inf <= q}
        let r = back.with_values(bg - &f_next - &(&mu * c))?;
        let mut coeffs = dwt2_forward(&r, spec)?;
        coeffs.map_inplace(|_, x| x.clamp(-q, q));
        let v_next = dwt2_inverse(&coeffs)?.into_values();

        let resid = &f_next + &v_next - bg;
        mu = mu + &(&resid / c);

        let slack = back.with_values(bg - &f_next)?;
        feasibility = dwt2_forward(&slack, spec)?.max_abs() / q;
        let step = (&f_next - &f).iter().map(|x| x * x).sum::<f64>().sqrt();
        let size = f_next.iter().map(|x| x * x).sum::<f64>().sqrt();
        f = f_next;
        v = v_next;

        let primal_residual = norm(&back.with_values(resid)?);
        history.push(AdmmRecord {
            iteration: k,
            primal_residual,
            feasibility,
            tv: tv_of_values(&f),
            inner_iterations: solve.iterations,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        if feasibility <= 1.0 + cfg.feasibility_tol && step <= cfg.feasibility_tol * size.max(f64::MIN_POSITIVE) {
            return Ok(AdmmOutcome {
                image: back.with_values(f)?,
                iterations: k,
                converged: true,
                feasibility,
                history,
            });
        }
    }
    Ok(AdmmOutcome {
        image: back.with_values(f)?,
        iterations: cfg.max_iters,
        converged: false,
        feasibility,
        history,
    })
}

pub fn hybrid_tv_run(
    op: &ForwardOperator,
    g: &DataField,
    q: f64,
    spec: &WaveletSpec,
    cfg: &AdmmConfig,
) -> Result<AdmmOutcome> {
    let back = op.adjoint(g)?;
    hybrid_tv_from_backprojection(&back, q, spec, cfg)
}

/// Like [`hybrid_tv_run`] but fails with `NotConverged` when the stopping
/// rule has not fired within `max_iters`.
pub fn hybrid_tv_estimator(
    op: &ForwardOperator,
    g: &DataField,
    q: f64,
    spec: &WaveletSpec,
    cfg: &AdmmConfig,
) -> Result<ImageField> {
    let out = hybrid_tv_run(op, g, q, spec, cfg)?;
    if !out.converged {
        return Err(PatError::NotConverged {
            solver: "admm",
            iterations: out.iterations,
            residual: out.feasibility - 1.0,
        });
    }
    Ok(out.image)
}
