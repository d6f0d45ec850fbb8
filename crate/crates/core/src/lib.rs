//! Wavelet-vaguelette reconstruction for photoacoustic tomography with a
//! planar line detector.

pub mod dwt;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod par;
pub mod simulation;
pub mod vaguelette;
pub mod wave;

pub use error::{PatError, Result};

/// Library version recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
