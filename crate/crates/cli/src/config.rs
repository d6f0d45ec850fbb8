//! Experiment configuration: one TOML document, unknown keys rejected.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pat_core::dwt::{WaveletFamily, WaveletSpec};
use pat_core::estimators::AdmmConfig;
use pat_core::grid::Grid2D;
use pat_core::simulation::{default_phantom, Disk, PhantomSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Wvd,
    Hybrid,
    All,
}

impl Method {
    pub fn expand(self) -> Vec<Method> {
        match self {
            Method::All => vec![Method::Baseline, Method::Wvd, Method::Hybrid],
            m => vec![m],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Wvd => "wvd",
            Method::Hybrid => "hybrid",
            Method::All => "all",
        }
    }
}

/// Grid, phantom, noise, wavelet, estimator and output settings of one run.
///
/// Every key is optional; missing keys take the default experiment values.
/// `seed` must fit in a signed 64-bit TOML integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Image side and detector sample count.
    pub n: usize,
    /// Side length of the square image box and of the detector.
    pub width: f64,
    pub n_t: usize,
    pub t_max: f64,
    pub sigma: f64,
    pub seed: u64,
    pub wavelet: String,
    pub levels: usize,
    pub method: Method,
    /// Multiplier on the calibrated per-level thresholds.
    pub threshold_scale: f64,
    /// Uniform threshold replacing the calibrated schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub admm_c: f64,
    pub admm_max_iters: usize,
    pub admm_feasibility_tol: f64,
    pub tv_inner_iters: usize,
    pub tv_inner_tol: f64,
    /// Detector window `[a, b]` applied to simulated data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture: Option<[f64; 2]>,
    /// Recording time applied to simulated data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_window: Option<f64>,
    pub output_dir: PathBuf,
    /// Monte-Carlo trials per estimator in `evaluate`.
    pub trials: usize,
    /// Noise seeds of the three-estimator comparison in `evaluate`.
    pub ordering_seeds: usize,
    /// Trials per noise level of the rate diagnostic; 0 skips it.
    pub rate_trials: usize,
    pub disks: Vec<Disk>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let admm = AdmmConfig::default();
        let grid = pat_core::simulation::default_grid();
        Self {
            n: grid.n_x,
            width: grid.n_x as f64 * grid.delta_x,
            n_t: grid.n_t,
            t_max: grid.t_max(),
            sigma: 0.25,
            seed: 0,
            wavelet: "db4".into(),
            levels: 4,
            method: Method::All,
            threshold_scale: 1.0,
            threshold: None,
            admm_c: admm.c,
            admm_max_iters: admm.max_iters,
            admm_feasibility_tol: admm.feasibility_tol,
            tv_inner_iters: admm.tv_inner_iters,
            tv_inner_tol: admm.tv_inner_tol,
            aperture: None,
            t_window: None,
            output_dir: PathBuf::from("out"),
            trials: 20,
            ordering_seeds: 5,
            rate_trials: 4,
            disks: default_phantom(grid).disks,
        }
    }
}

/// Validated objects built from a config.
pub struct Resolved {
    pub grid: Grid2D,
    pub spec: WaveletSpec,
    pub phantom: PhantomSpec,
    pub admm: AdmmConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {}", e.message())))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        if self.seed > i64::MAX as u64 {
            return Err(CliError::config(format!("seed {} exceeds {}", self.seed, i64::MAX)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(CliError::config(format!("sigma {} must be >= 0", self.sigma)));
        }
        if !(self.threshold_scale >= 0.0 && self.threshold_scale.is_finite()) {
            return Err(CliError::config(format!(
                "threshold_scale {} must be >= 0",
                self.threshold_scale
            )));
        }
        if let Some(w) = self.threshold {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(CliError::config(format!("threshold {w} must be >= 0")));
            }
        }
        if !(self.width > 0.0 && self.t_max > 0.0) {
            return Err(CliError::config("width and t_max must be positive"));
        }
        let grid = Grid2D::square(self.n, self.width, self.n_t, self.t_max)?;
        let spec = WaveletSpec::new(WaveletFamily::parse(&self.wavelet)?, self.levels)?;
        spec.check_grid(&grid)?;
        let phantom = PhantomSpec {
            disks: self.disks.clone(),
            grid,
        };
        phantom.validate()?;
        let admm = AdmmConfig {
            c: self.admm_c,
            max_iters: self.admm_max_iters,
            feasibility_tol: self.admm_feasibility_tol,
            tv_inner_iters: self.tv_inner_iters,
            tv_inner_tol: self.tv_inner_tol,
        };
        admm.validate()?;
        Ok(Resolved {
            grid,
            spec,
            phantom,
            admm,
        })
    }
}
