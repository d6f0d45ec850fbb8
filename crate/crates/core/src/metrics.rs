//! Reconstruction errors, Monte-Carlo risk over fixed phantoms and the
//! three-estimator comparison on the default noisy experiment.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dwt::{WaveletFamily, WaveletSpec};
use crate::error::{PatError, Result};
use crate::estimators::{
    calibrate_noise_levels, hybrid_tv_estimator, hybrid_tv_from_backprojection,
    soft_threshold_image, universal_schedule, wvd_soft_estimator, AdmmConfig, ThresholdSchedule,
};
use crate::grid::{norm, DataField, ImageField};
use crate::par;
use crate::simulation::{default_grid, default_phantom, make_phantom, trial_seed, white_noise};
use crate::wave::{Backend, ForwardOperator};

/// `||rec - truth|| / ||truth||`.
pub fn relative_l2(rec: &ImageField, truth: &ImageField) -> Result<f64> {
    let t = norm(truth);
    if t == 0.0 {
        return Err(PatError::ZeroTruth);
    }
    Ok(norm(&rec.sub(truth)?) / t)
}

/// An estimator `g -> f` together with the name it is reported under.
pub struct NamedEstimator<'a> {
    pub name: String,
    pub run: Box<dyn Fn(&DataField) -> Result<ImageField> + Send + Sync + 'a>,
}

impl<'a> NamedEstimator<'a> {
    pub fn new(
        name: impl Into<String>,
        run: impl Fn(&DataField) -> Result<ImageField> + Send + Sync + 'a,
    ) -> Self {
        Self {
            name: name.into(),
            run: Box::new(run),
        }
    }

    /// `A* g`.
    pub fn baseline(op: &'a ForwardOperator) -> Self {
        Self::new("baseline", move |g| op.adjoint(g))
    }

    pub fn wvd(op: &'a ForwardOperator, sched: ThresholdSchedule, spec: WaveletSpec) -> Self {
        Self::new("wvd", move |g| wvd_soft_estimator(op, g, &sched, &spec))
    }

    pub fn hybrid(op: &'a ForwardOperator, q: f64, spec: WaveletSpec, cfg: AdmmConfig) -> Self {
        Self::new("hybrid", move |g| hybrid_tv_estimator(op, g, q, &spec, &cfg))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator_name: String,
    pub trials: usize,
    pub mean_sq_error: f64,
    /// Standard error of `mean_sq_error`.
    pub std_err: f64,
    pub per_trial: Vec<f64>,
}

impl RiskReport {
    /// Summary of the squared errors, summed in trial order.
    pub fn from_trials(estimator_name: impl Into<String>, per_trial: Vec<f64>) -> Self {
        let n = per_trial.len();
        let mean = per_trial.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            per_trial.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            estimator_name: estimator_name.into(),
            trials: n,
            mean_sq_error: mean,
            std_err: (var / n as f64).sqrt(),
            per_trial,
        }
    }

    /// Difference of mean risks in units of their combined standard error;
    /// positive when `self` has the smaller risk.
    pub fn separation_from(&self, other: &RiskReport) -> f64 {
        let se = self.std_err.hypot(other.std_err);
        (other.mean_sq_error - self.mean_sq_error) / se
    }
}

/// CSV with one row per (estimator, trial).
pub fn risk_csv(reports: &[RiskReport]) -> String {
    let mut out = String::from("estimator,trial,sq_error\n");
    for r in reports {
        for (i, e) in r.per_trial.iter().enumerate() {
            writeln!(out, "{},{},{:e}", r.estimator_name, i, e).expect("write to string");
        }
    }
    out
}

/// Squared L² errors of `estimator` on `A phantom + z_i` for `trials` seeded
/// noise draws `z_i`; trial `i` uses seed `seed ^ i`.
pub fn monte_carlo_risk(
    op: &ForwardOperator,
    estimator: &NamedEstimator<'_>,
    phantom: &ImageField,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<RiskReport> {
    if trials < 2 {
        return Err(PatError::InvalidParams(format!("need at least 2 trials, got {trials}")));
    }
    let clean = op.apply(phantom)?;
    let grid = *op.grid();
    let errs = par::map_range(trials, |i| -> Result<f64> {
        let g = clean.add(&white_noise(grid, sigma, trial_seed(seed, i))?)?;
        let rec = (estimator.run)(&g)?;
        Ok(norm(&rec.sub(phantom)?).powi(2))
    });
    let per_trial = errs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RiskReport::from_trials(estimator.name.clone(), per_trial))
}

/// Seeds used for deterministic threshold calibration.
pub const CALIBRATION_SEED: u64 = 0x7e57_ca1b;
pub const CALIBRATION_DRAWS: usize = 8;

/// A phantom, its clean data and every estimator parameter needed to run
/// baseline, WVD and hybrid reconstructions at any noise level.
pub struct Experiment {
    pub op: ForwardOperator,
    pub truth: ImageField,
    pub clean: DataField,
    pub spec: WaveletSpec,
    pub sigma: f64,
    /// Multiplier on the half-universal threshold.
    pub threshold_scale: f64,
    pub admm: AdmmConfig,
    /// Per-level vaguelette coefficient deviation for unit data noise.
    pub unit_levels: Vec<f64>,
}

impl Experiment {
    pub fn new(
        op: ForwardOperator,
        truth: ImageField,
        spec: WaveletSpec,
        sigma: f64,
        threshold_scale: f64,
        admm: AdmmConfig,
    ) -> Result<Self> {
        if !(sigma >= 0.0 && threshold_scale >= 0.0) {
            return Err(PatError::InvalidParams(format!(
                "sigma {sigma} and threshold scale {threshold_scale} must be >= 0"
            )));
        }
        admm.validate()?;
        let clean = op.apply(&truth)?;
        let unit_levels = calibrate_noise_levels(&op, &spec, 1.0, CALIBRATION_DRAWS, CALIBRATION_SEED)?;
        Ok(Self {
            op,
            truth,
            clean,
            spec,
            sigma,
            threshold_scale,
            admm,
            unit_levels,
        })
    }

    /// Default grid and phantom, Daubechies-4 with four levels, `sigma = 0.25`.
    pub fn default_setup() -> Result<Self> {
        let grid = default_grid();
        let op = ForwardOperator::new(grid, Backend::Spectral)?;
        let truth = make_phantom(&default_phantom(grid))?;
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(4), 4)?;
        Self::new(op, truth, spec, 0.25, 1.0, AdmmConfig::default())
    }

    /// Thresholds for data noise of deviation `sigma`.
    pub fn schedule(&self, sigma: f64) -> Result<ThresholdSchedule> {
        let levels: Vec<f64> = self.unit_levels.iter().map(|s| s * sigma).collect();
        universal_schedule(&levels, self.op.grid())?.scaled(self.threshold_scale)
    }

    /// Hybrid constraint level: the finest-level threshold.
    pub fn constraint_level(&self, sigma: f64) -> Result<f64> {
        Ok(self.schedule(sigma)?.weight(self.spec.levels))
    }

    pub fn noisy_data(&self, seed: u64) -> Result<DataField> {
        self.clean.add(&white_noise(*self.op.grid(), self.sigma, seed)?)
    }

    /// All three reconstructions from one noise realisation.
    pub fn run(&self, seed: u64) -> Result<OrderingRow> {
        let g = self.noisy_data(seed)?;
        let data_error = norm(&g.sub(&self.clean)?) / norm(&self.clean).max(f64::MIN_POSITIVE);
        let back = self.op.adjoint(&g)?;
        let wvd = soft_threshold_image(&back, &self.schedule(self.sigma)?, &self.spec)?;
        let hyb = hybrid_tv_from_backprojection(
            &back,
            self.constraint_level(self.sigma)?,
            &self.spec,
            &self.admm,
        )?;
        Ok(OrderingRow {
            seed,
            data_error,
            baseline: relative_l2(&back, &self.truth)?,
            wvd: relative_l2(&wvd, &self.truth)?,
            hybrid: relative_l2(&hyb.image, &self.truth)?,
            hybrid_iterations: hyb.iterations,
            hybrid_converged: hyb.converged,
            hybrid_feasibility: hyb.feasibility,
        })
    }
}

/// Relative errors of the three estimators for one seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingRow {
    pub seed: u64,
    pub data_error: f64,
    pub baseline: f64,
    pub wvd: f64,
    pub hybrid: f64,
    pub hybrid_iterations: usize,
    pub hybrid_converged: bool,
    pub hybrid_feasibility: f64,
}

impl OrderingRow {
    /// `wvd < hybrid < baseline`.
    pub fn ordering_holds(&self) -> bool {
        self.wvd < self.hybrid && self.hybrid < self.baseline
    }
}

pub fn risk_ordering_experiment(exp: &Experiment, seeds: &[u64]) -> Result<Vec<OrderingRow>> {
    seeds.iter().map(|&s| exp.run(s)).collect()
}

pub fn ordering_csv(rows: &[OrderingRow]) -> String {
    let mut out = String::from(
        "seed,data_error,baseline,wvd,hybrid,hybrid_iterations,hybrid_converged,hybrid_feasibility\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6}",
            r.seed,
            r.data_error,
            r.baseline,
            r.wvd,
            r.hybrid,
            r.hybrid_iterations,
            r.hybrid_converged,
            r.hybrid_feasibility
        )
        .expect("write to string");
    }
    out
}

/// Noise levels of the risk-versus-noise diagnostic.
pub const RATE_DELTAS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub delta: f64,
    pub risk: f64,
    pub std_err: f64,
}

/// WVD risk over a range of noise levels and the least-squares slope of
/// `log risk` against `log delta`. Exploratory only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDiagnostic {
    pub points: Vec<RatePoint>,
    pub slope: f64,
}

pub fn rate_diagnostic(
    exp: &Experiment,
    deltas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<RateDiagnostic> {
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(PatError::InvalidParams("need at least two positive noise levels".into()));
    }
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let est = NamedEstimator::wvd(&exp.op, exp.schedule(delta)?, exp.spec.clone());
        let r = monte_carlo_risk(&exp.op, &est, &exp.truth, delta, trials, seed)?;
        points.push(RatePoint {
            delta,
            risk: r.mean_sq_error,
            std_err: r.std_err,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.delta.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.risk.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(RateDiagnostic {
        slope: ls_slope(&xs, &ys),
        points,
    })
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
