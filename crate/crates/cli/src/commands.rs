//! `simulate`, `reconstruct` and `evaluate`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pat_core::estimators::{
    calibrate_noise_levels, hybrid_tv_from_backprojection, soft_threshold_image,
    universal_schedule, ThresholdSchedule,
};
use pat_core::grid::{norm, DataField, Field, ImageField};
use pat_core::io::{read_data, read_image, write_data, write_image, write_pgm};
use pat_core::metrics::{
    monte_carlo_risk, ordering_csv, rate_diagnostic, relative_l2, risk_csv, risk_ordering_experiment,
    Experiment, NamedEstimator, CALIBRATION_DRAWS, CALIBRATION_SEED, RATE_DELTAS,
};
use pat_core::par;
use pat_core::simulation::{add_noise, apply_limited_view, make_phantom, NoiseSpec};
use pat_core::wave::{Backend, ForwardOperator};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Method, Resolved};
use crate::error::{CliError, CliResult, EXIT_NOT_CONVERGED};

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn output_dir(cfg: &ExperimentConfig, overridden: Option<&Path>) -> PathBuf {
    overridden.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone())
}

/// Calibrated thresholds for the configured noise level, or the uniform
/// override.
fn schedule(cfg: &ExperimentConfig, r: &Resolved, op: &ForwardOperator) -> CliResult<ThresholdSchedule> {
    if let Some(w) = cfg.threshold {
        return Ok(ThresholdSchedule::uniform(w, r.spec.levels)?);
    }
    let unit = calibrate_noise_levels(op, &r.spec, 1.0, CALIBRATION_DRAWS, CALIBRATION_SEED)?;
    let levels: Vec<f64> = unit.iter().map(|s| s * cfg.sigma).collect();
    Ok(universal_schedule(&levels, &r.grid)?.scaled(cfg.threshold_scale)?)
}

pub fn simulate(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    let r = cfg.resolve()?;
    let dir = output_dir(cfg, out);
    ensure_dir(&dir)?;
    let op = ForwardOperator::new(r.grid, Backend::Spectral)?;
    let f = make_phantom(&r.phantom)?;
    let mut clean = op.apply(&f)?;
    let mut noisy = add_noise(
        &clean,
        &NoiseSpec {
            sigma: cfg.sigma,
            seed: cfg.seed,
        },
    )?;
    if cfg.aperture.is_some() || cfg.t_window.is_some() {
        let (x0, x1) = r.grid.x_extent();
        let [a, b] = cfg.aperture.unwrap_or([x0, x1]);
        let t = cfg.t_window.unwrap_or(r.grid.t_max());
        clean = apply_limited_view(&clean, (a, b), t)?;
        noisy = apply_limited_view(&noisy, (a, b), t)?;
    }
    let files = [
        dir.join("phantom.pgf1"),
        dir.join("data_clean.pgf1"),
        dir.join("data_noisy.pgf1"),
        dir.join("phantom.pgm"),
        dir.join("data_noisy.pgm"),
    ];
    write_image(&files[0], &f)?;
    write_data(&files[1], &clean)?;
    write_data(&files[2], &noisy)?;
    write_pgm(&files[3], &f)?;
    write_pgm(&files[4], &noisy)?;
    let data_error = norm(&noisy.sub(&clean)?) / norm(&clean).max(f64::MIN_POSITIVE);
    let manifest = json!({
        "command": "simulate",
        "version": pat_core::VERSION,
        "threads": par::current_threads(),
        "config": cfg,
        "grid": r.grid,
        "relative_data_error": data_error,
        "outputs": files.iter().map(|p| p.file_name().unwrap().to_string_lossy()).collect::<Vec<_>>(),
    });
    let manifest_path = dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    let mut all = files.to_vec();
    all.push(manifest_path);
    Ok(all)
}

#[derive(Debug, Serialize)]
struct MethodResult {
    method: &'static str,
    output: String,
    relative_error: Option<f64>,
    seconds: f64,
    iterations: Option<usize>,
    feasibility: Option<f64>,
    converged: bool,
}

pub struct ReconstructArgs<'a> {
    pub data: &'a Path,
    pub method: Method,
    pub truth: Option<&'a Path>,
    pub threshold: Option<f64>,
    pub out: Option<&'a Path>,
}

pub fn reconstruct(cfg: &ExperimentConfig, args: &ReconstructArgs<'_>) -> CliResult<()> {
    let mut cfg = cfg.clone();
    if args.threshold.is_some() {
        cfg.threshold = args.threshold;
    }
    let r = cfg.resolve()?;
    let g: DataField = read_data(args.data)?;
    if *g.grid() != r.grid {
        return Err(CliError::config(format!(
            "data grid {:?} does not match the configured grid {:?}",
            g.grid(),
            r.grid
        )));
    }
    let truth: Option<ImageField> = args.truth.map(read_image).transpose()?;
    if let Some(t) = &truth {
        if *t.grid() != r.grid {
            return Err(CliError::config("truth grid does not match the configured grid"));
        }
    }
    let dir = output_dir(&cfg, args.out);
    ensure_dir(&dir)?;
    let op = ForwardOperator::new(r.grid, Backend::Spectral)?;

    let methods = args.method.expand();
    let single = methods.len() == 1;
    let start = Instant::now();
    let back = op.adjoint(&g)?;
    let back_secs = start.elapsed().as_secs_f64();
    let sched = if methods.iter().any(|m| *m != Method::Baseline) {
        Some(schedule(&cfg, &r, &op)?)
    } else {
        None
    };

    let mut results = Vec::new();
    for m in methods {
        let stem = if single {
            "recon".to_string()
        } else {
            format!("recon_{}", m.name())
        };
        let t0 = Instant::now();
        let (image, iterations, feasibility, converged) = match m {
            Method::Baseline => (back.clone(), None, None, true),
            Method::Wvd => {
                let s = sched.as_ref().expect("schedule");
                (soft_threshold_image(&back, s, &r.spec)?, None, None, true)
            }
            Method::Hybrid => {
                let s = sched.as_ref().expect("schedule");
                let q = s.weight(r.spec.levels);
                let out = hybrid_tv_from_backprojection(&back, q, &r.spec, &r.admm)?;
                let log = dir.join(format!("{stem}_admm.jsonl"));
                let mut file = fs::File::create(&log)?;
                for rec in &out.history {
                    writeln!(file, "{}", serde_json::to_string(rec)?)?;
                }
                (out.image, Some(out.iterations), Some(out.feasibility), out.converged)
            }
            Method::All => unreachable!("expanded above"),
        };
        let seconds = t0.elapsed().as_secs_f64() + back_secs;
        write_image(dir.join(format!("{stem}.pgf1")), &image)?;
        write_pgm(dir.join(format!("{stem}.pgm")), &image)?;
        results.push(MethodResult {
            method: m.name(),
            output: format!("{stem}.pgf1"),
            relative_error: truth.as_ref().map(|t| relative_l2(&image, t)).transpose()?,
            seconds,
            iterations,
            feasibility,
            converged,
        });
    }

    let converged = results.iter().all(|m| m.converged);
    let err = |name: &str| {
        results
            .iter()
            .find(|m| m.method == name)
            .and_then(|m| m.relative_error)
    };
    let ordering = match (err("baseline"), err("wvd"), err("hybrid")) {
        (Some(b), Some(w), Some(h)) => Some(w < h && h < b),
        _ => None,
    };
    let metrics = json!({
        "command": "reconstruct",
        "version": pat_core::VERSION,
        "threads": par::current_threads(),
        "data": args.data,
        "truth": args.truth,
        "config": cfg,
        "thresholds": sched.as_ref().map(|s| s.weights().to_vec()),
        "results": results,
        "wvd_below_hybrid_below_baseline": ordering,
        "converged": converged,
    });
    write_json(&dir.join("metrics.json"), &metrics)?;
    if !converged {
        return Err(CliError {
            code: EXIT_NOT_CONVERGED,
            message: "hybrid solver did not converge; outputs written with \"converged\": false".into(),
        });
    }
    Ok(())
}

pub fn evaluate(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<()> {
    let r = cfg.resolve()?;
    let dir = output_dir(cfg, out);
    ensure_dir(&dir)?;
    let op = ForwardOperator::new(r.grid, Backend::Spectral)?;
    let truth = make_phantom(&r.phantom)?;
    let exp = Experiment::new(op, truth, r.spec.clone(), cfg.sigma, cfg.threshold_scale, r.admm)?;

    let mut risks = Vec::new();
    if cfg.trials > 0 {
        let sched = exp.schedule(cfg.sigma)?;
        for m in cfg.method.expand() {
            let est = match m {
                Method::Baseline => NamedEstimator::baseline(&exp.op),
                Method::Wvd => NamedEstimator::wvd(&exp.op, sched.clone(), exp.spec.clone()),
                Method::Hybrid => NamedEstimator::hybrid(
                    &exp.op,
                    exp.constraint_level(cfg.sigma)?,
                    exp.spec.clone(),
                    exp.admm,
                ),
                Method::All => unreachable!("expanded above"),
            };
            risks.push(monte_carlo_risk(&exp.op, &est, &exp.truth, cfg.sigma, cfg.trials, cfg.seed)?);
        }
        write_text(&dir.join("risk.csv"), &risk_csv(&risks))?;
    }

    let seeds: Vec<u64> = (0..cfg.ordering_seeds as u64).map(|i| cfg.seed + i).collect();
    let rows = risk_ordering_experiment(&exp, &seeds)?;
    if !rows.is_empty() {
        write_text(&dir.join("ordering.csv"), &ordering_csv(&rows))?;
    }

    let rate = if cfg.rate_trials >= 2 {
        let d = rate_diagnostic(&exp, &RATE_DELTAS, cfg.rate_trials, cfg.seed)?;
        let mut csv = String::from("delta,risk,std_err\n");
        for p in &d.points {
            csv.push_str(&format!("{},{:.6e},{:.6e}\n", p.delta, p.risk, p.std_err));
        }
        write_text(&dir.join("rate.csv"), &csv)?;
        Some(d)
    } else {
        None
    };

    let holds = rows.iter().filter(|r| r.ordering_holds()).count();
    let summary = json!({
        "command": "evaluate",
        "version": pat_core::VERSION,
        "threads": par::current_threads(),
        "config": cfg,
        "risk": risks,
        "ordering": rows,
        "ordering_holds": format!("{holds}/{}", rows.len()),
        "rate": rate,
    });
    write_json(&dir.join("evaluate.json"), &summary)?;
    for r in &risks {
        println!("risk {:<9} {:.4e} ± {:.1e}", r.estimator_name, r.mean_sq_error, r.std_err);
    }
    for row in &rows {
        println!(
            "seed {}: data {:.3} baseline {:.3} wvd {:.3} hybrid {:.3}",
            row.seed, row.data_error, row.baseline, row.wvd, row.hybrid
        );
    }
    if let Some(d) = &rate {
        println!("rate slope {:.3}", d.slope);
    }
    Ok(())
}
