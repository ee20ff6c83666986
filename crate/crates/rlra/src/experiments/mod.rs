//! Reproducible experiment runners with CSV and PGM output.
//!
//! Every runner is driven by an [`config::ExperimentConfig`], derives all
//! randomness from its seed, and formats floats at 17 significant digits, so
//! re-running a config reproduces every output file byte for byte.

pub mod config;
pub mod instances;
pub mod io;
pub mod metrics;
pub mod runners;

pub use config::{ConstraintConfig, ExperimentConfig, TraceConstraintConfig, TraceSense};
pub use instances::{add_gaussian_noise, gen_nonneg_instance, synth_low_rank_image};
pub use metrics::{psnr, quality, snr, QualityMetrics};
pub use runners::{
    run_denoise, run_fixed_points, run_fsr_sdpr, run_nonneg_experiment, run_rho_sweep, run_solve,
};
