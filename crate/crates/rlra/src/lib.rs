//! Restricted low-rank approximation.
//!
//! Given a target matrix, find the closest matrix in Frobenius norm that
//! satisfies both a rank bound and a convex constraint (non-negativity, box
//! bounds, pinned entries, Hankel or Toeplitz structure, the PSD cone, trace
//! constraints, or intersections of these). The solver splits the two
//! constraint classes with ADMM: exact Euclidean projections handle the convex
//! side, truncated SVD handles the rank side, and a scaled dual variable ties
//! them together.
//!
//! The crate also ships the surrounding toolkit: alternating-projection and
//! multiplicative-update baselines, fixed-point analysis of the iteration map,
//! and reproducible experiment runners with CSV and PGM output.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! examples/
//! |-- nonneg_lra.rs     non-negative low-rank approximation vs. ADP and NMF
//! |-- rho_sweep.rs      effect of the penalty weight on convergence speed
//! |-- denoise.rs        image denoising with a rank bound and pinned pixels
//! |-- fixed_points.rs   enumerating fixed points of the iteration map
//! |-- fsr_sdpr.rs       feasible rank-1 solutions after a semidefinite relaxation
//! `-- hankel_slra.rs    structured low-rank approximation of a Hankel matrix
//! ```
//!
//! Run one with:
//!
//! ```text
//! cargo run -p rlra --example nonneg_lra
//! ```
//!
//! The same capabilities are reachable from the command line through the thin
//! `rlra` binary (`solve`, `nonneg`, `rho-sweep`, `denoise`, `fixed-points`,
//! `fsr-sdpr`), each driven by a JSON config file plus flag overrides.
//!
//! ## Quick start
//!
//! ```
//! use rlra::admm::{admm_solve, AdmmConfig, RlraProblem, Termination};
//! use rlra::constraints::ConstraintSpec;
//! use rlra::matrix::DenseMatrix;
//!
//! // Closest rank-1 non-negative matrix to a 2x2 target.
//! let target = DenseMatrix::new(2, 2, vec![1.0, -0.5, 2.0, 1.5]).unwrap();
//! let problem = RlraProblem::new(target, 1, ConstraintSpec::NonNegative).unwrap();
//! let report = admm_solve(&problem, &AdmmConfig::default()).unwrap();
//! assert_eq!(report.termination, Termination::Converged);
//! assert!(report.x_final.data().iter().all(|v| *v >= 0.0));
//! ```

pub mod admm;
pub mod baselines;
pub mod constraints;
pub mod error;
pub mod experiments;
pub mod fixed_point;
pub mod matrix;

pub use error::{Error, Result};
