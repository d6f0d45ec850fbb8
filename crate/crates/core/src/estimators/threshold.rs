use serde::{Deserialize, Serialize};

use crate::dwt::{dwt2_forward, dwt2_inverse, WaveletPyramid, WaveletSpec};
use crate::error::{PatError, Result};
use crate::grid::{DataField, Grid2D, ImageField};
use crate::simulation::white_noise;
use crate::vaguelette::vaguelette_transform;
use crate::wave::ForwardOperator;

/// `sign(y) · max(|y| - w, 0)`.
#[inline]
pub fn soft_threshold(y: f64, w: f64) -> f64 {
    if y > w {
        y - w
    } else if y < -w {
        y + w
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleMode {
    /// Same threshold on every band, scaling block included.
    Uniform,
    /// Arbitrary per-level thresholds.
    PerLevel,
    /// Per-level thresholds with the scaling block left untouched.
    ZeroCoarse,
}

/// Level-dependent thresholds; entry `j` applies to level `j`, entry 0 to the
/// scaling block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSchedule {
    mode: ScheduleMode,
    per_level: Vec<f64>,
}

impl ThresholdSchedule {
    fn build(mode: ScheduleMode, mut per_level: Vec<f64>) -> Result<Self> {
        if per_level.len() < 2 {
            return Err(PatError::InvalidParams(
                "a schedule needs the scaling block and at least one level".into(),
            ));
        }
        if let Some(w) = per_level.iter().find(|w| !(**w >= 0.0)) {
            return Err(PatError::InvalidParams(format!("negative or NaN threshold {w}")));
        }
        if mode == ScheduleMode::ZeroCoarse {
            per_level[0] = 0.0;
        }
        Ok(Self { mode, per_level })
    }

    pub fn uniform(w: f64, levels: usize) -> Result<Self> {
        Self::build(ScheduleMode::Uniform, vec![w; levels + 1])
    }

    pub fn zero_coarse(w: f64, levels: usize) -> Result<Self> {
        Self::build(ScheduleMode::ZeroCoarse, vec![w; levels + 1])
    }

    pub fn per_level(per_level: Vec<f64>) -> Result<Self> {
        Self::build(ScheduleMode::PerLevel, per_level)
    }

    pub fn per_level_zero_coarse(per_level: Vec<f64>) -> Result<Self> {
        Self::build(ScheduleMode::ZeroCoarse, per_level)
    }

    pub fn zero(levels: usize) -> Self {
        Self::build(ScheduleMode::Uniform, vec![0.0; levels + 1]).expect("zero schedule")
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn levels(&self) -> usize {
        self.per_level.len() - 1
    }

    pub fn weight(&self, level: usize) -> f64 {
        self.per_level[level]
    }

    pub fn weights(&self) -> &[f64] {
        &self.per_level
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::build(self.mode, self.per_level.iter().map(|w| w * factor).collect())
    }

    pub(crate) fn check(&self, spec: &WaveletSpec) -> Result<()> {
        if self.levels() != spec.levels {
            return Err(PatError::InvalidParams(format!(
                "schedule has {} levels, wavelet has {}",
                self.levels(),
                spec.levels
            )));
        }
        Ok(())
    }

    /// Soft-thresholds every coefficient of `p` in place.
    pub fn apply(&self, p: &mut WaveletPyramid) {
        p.map_inplace(|j, v| soft_threshold(v, self.per_level[j]));
    }

    /// `sum_lambda w_j |c_lambda|`.
    pub fn weighted_l1(&self, p: &WaveletPyramid) -> f64 {
        p.iter_levels().map(|(j, v)| self.per_level[j] * v.abs()).sum()
    }
}

/// Half the universal threshold, `0.5 · sigma_c · sqrt(2 ln(n_x n_y))`, where
/// `sigma_c` is the noise deviation of one coefficient.
pub fn universal_threshold(sigma_c: f64, grid: &Grid2D) -> f64 {
    let n = (grid.n_x * grid.n_y) as f64;
    0.5 * sigma_c * (2.0 * n.ln()).sqrt()
}

/// Per-level deviation of vaguelette coefficients under white data noise of
/// deviation `sigma`, estimated from `draws` seeded noise realisations.
pub fn calibrate_noise_levels(
    op: &ForwardOperator,
    spec: &WaveletSpec,
    sigma: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(PatError::InvalidParams("need at least one noise draw".into()));
    }
    let grid = *op.grid();
    let mut sums = vec![0.0; spec.levels + 1];
    let mut counts = vec![0usize; spec.levels + 1];
    for d in 0..draws {
        let z = white_noise(grid, 1.0, seed ^ (d as u64))?;
        let c = vaguelette_transform(op, &z, spec)?;
        for (j, v) in c.pyramid.iter_levels() {
            sums[j] += v * v;
            counts[j] += 1;
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| sigma * (s / n as f64).sqrt())
        .collect())
}

/// Robust deviation estimate `median(|c|) / 0.6745` over the finest level.
pub fn mad_noise_estimate(p: &WaveletPyramid) -> f64 {
    let finest = p.levels();
    let mut mags: Vec<f64> = p
        .iter_levels()
        .filter(|(j, _)| *j == finest)
        .map(|(_, v)| v.abs())
        .collect();
    if mags.is_empty() {
        return 0.0;
    }
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
    let mid = mags.len() / 2;
    let median = if mags.len() % 2 == 0 {
        0.5 * (mags[mid - 1] + mags[mid])
    } else {
        mags[mid]
    };
    median / 0.6745
}

/// Half-universal thresholds from per-level coefficient deviations; the
/// scaling block is left unthresholded.
pub fn universal_schedule(sigma_levels: &[f64], grid: &Grid2D) -> Result<ThresholdSchedule> {
    ThresholdSchedule::per_level_zero_coarse(
        sigma_levels
            .iter()
            .map(|&s| universal_threshold(s, grid))
            .collect(),
    )
}

/// `W* s_w(W A* g)`.
pub fn wvd_soft_estimator(
    op: &ForwardOperator,
    g: &DataField,
    sched: &ThresholdSchedule,
    spec: &WaveletSpec,
) -> Result<ImageField> {
    sched.check(spec)?;
    let mut c = vaguelette_transform(op, g, spec)?.into_pyramid();
    sched.apply(&mut c);
    dwt2_inverse(&c)
}

/// Same estimator starting from an already back-projected image `A* g`.
pub fn soft_threshold_image(
    back: &ImageField,
    sched: &ThresholdSchedule,
    spec: &WaveletSpec,
) -> Result<ImageField> {
    sched.check(spec)?;
    let mut c = dwt2_forward(back, spec)?;
    sched.apply(&mut c);
    dwt2_inverse(&c)
}
