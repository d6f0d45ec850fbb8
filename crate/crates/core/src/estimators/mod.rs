//! Thresholding estimators, the l1-Tikhonov reference solver and the hybrid
//! vaguelette-TV solver.

pub mod admm;
pub mod ista;
pub mod threshold;
pub mod tv;

pub use admm::{
    hybrid_tv_estimator, hybrid_tv_from_backprojection, hybrid_tv_run, AdmmConfig, AdmmOutcome,
    AdmmRecord,
};
pub use ista::{ista_oracle, ista_run, l1_tikhonov_objective, IstaConfig, IstaOutcome};
pub use threshold::{
    calibrate_noise_levels, mad_noise_estimate, soft_threshold, soft_threshold_image,
    universal_schedule, universal_threshold, wvd_soft_estimator, ScheduleMode, ThresholdSchedule,
};
pub use tv::{chambolle, total_variation, tv_denoise_chambolle, TvDual, TvSolve};
