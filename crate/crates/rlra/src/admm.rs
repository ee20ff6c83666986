//! ADMM solver for low-rank approximation under a convex constraint.
//!
//! The problem is split as `min |X - target|_F^2` subject to `X` in the convex
//! set and `Y` of rank at most `K`, with `X = Y` enforced through a scaled
//! dual variable `U`. One update order projects onto the convex set first and
//! truncates second; the other swaps the two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constraints::{membership, project, ConstraintSpec};
use crate::error::{Error, Result};
use crate::matrix::{frob_dist, numerical_rank, symmetric_eigen, truncated_svd, DenseMatrix};

/// Tolerance used for the per-iteration feasibility flags and for snapping
/// the final iterate: membership violations and the relative singular value
/// cutoff are both compared against it.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// A target matrix, a rank bound, and a convex constraint.
#[derive(Clone, Debug)]
pub struct RlraProblem {
    target: DenseMatrix,
    rank_bound: usize,
    constraint: ConstraintSpec,
}

impl RlraProblem {
    pub fn new(
        target: DenseMatrix,
        rank_bound: usize,
        constraint: ConstraintSpec,
    ) -> Result<Self> {
        let max_rank = target.rows().min(target.cols());
        if rank_bound == 0 || rank_bound > max_rank {
            return Err(Error::invalid(format!(
                "rank bound must lie in 1..={max_rank}, got {rank_bound}"
            )));
        }
        constraint.validate_for(target.rows(), target.cols())?;
        Ok(RlraProblem {
            target,
            rank_bound,
            constraint,
        })
    }

    pub fn target(&self) -> &DenseMatrix {
        &self.target
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn constraint(&self) -> &ConstraintSpec {
        &self.constraint
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    /// Convex projection first, truncated SVD second.
    ConvexFirst,
    /// Truncated SVD first, convex projection second.
    RankFirst,
}

/// How the `Y` iterate starts; the dual always starts at zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitStrategy {
    /// Truncated SVD of the target (the default: the unconstrained optimum).
    TruncatedTarget,
    Zeros,
    TargetCopy,
    /// Standard normal entries drawn from the given seed.
    Seeded(u64),
}

#[derive(Clone, Debug)]
pub struct AdmmConfig {
    pub rho: f64,
    pub order: UpdateOrder,
    pub max_iters: usize,
    /// Threshold on the primal residual `|X - Y|_F`.
    pub primal_tol: f64,
    /// Threshold on the dual change `rho * |Y_next - Y|_F`.
    pub dual_change_tol: f64,
    pub init: InitStrategy,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: 5.0,
            order: UpdateOrder::ConvexFirst,
            max_iters: 2000,
            primal_tol: 1e-6,
            dual_change_tol: 1e-6,
            init: InitStrategy::TruncatedTarget,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::invalid("rho must be a positive finite number"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.primal_tol > 0.0) || !(self.dual_change_tol > 0.0) {
            return Err(Error::invalid("stopping tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AdmmState {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub u: DenseMatrix,
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: AdmmState,
    /// False when an intersection projection hit its sweep cap this step.
    pub projection_converged: bool,
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iter: usize,
    /// `|X - target|_F` after the step.
    pub objective: f64,
    /// `|X - Y|_F` after the step.
    pub primal_residual: f64,
    /// `rho * |Y - Y_prev|_F` across the step.
    pub dual_change: f64,
    /// `|X - X_prev|_F`; absent on the first iteration.
    pub x_step: Option<f64>,
    /// X passes membership and rank checks at [`FEASIBILITY_TOL`].
    pub x_feasible: bool,
    /// Y passes membership and rank checks at [`FEASIBILITY_TOL`].
    pub y_feasible: bool,
    /// False when the convex projection did not converge this iteration.
    pub projection_converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Both stopping thresholds were met and the final iterate snapped to a
    /// feasible point.
    Converged,
    /// The iteration cap was reached first.
    IterCap,
    /// Residuals converged but the final iterate failed a feasibility check.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x_final: DenseMatrix,
    pub y_final: DenseMatrix,
    pub u_final: DenseMatrix,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map(|r| r.objective).unwrap_or(0.0)
    }

    pub fn final_primal_residual(&self) -> f64 {
        self.trace
            .last()
            .map(|r| r.primal_residual)
            .unwrap_or(f64::INFINITY)
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// The quadratic part of the X update collapses to a single least-squares
/// target: `(target + (rho/2) * (Y - U)) / (1 + rho/2)`.
pub fn x_update_target(
    target: &DenseMatrix,
    y: &DenseMatrix,
    u: &DenseMatrix,
    rho: f64,
) -> Result<DenseMatrix> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid("rho must be a positive finite number"));
    }
    target.require_same_shape(y)?;
    target.require_same_shape(u)?;
    let half_rho = 0.5 * rho;
    let factor = 1.0 / (1.0 + half_rho);
    let mut data = Vec::with_capacity(target.rows() * target.cols());
    for idx in 0..target.data().len() {
        data.push(factor * (target.data()[idx] + half_rho * (y.data()[idx] - u.data()[idx])));
    }
    DenseMatrix::new(target.rows(), target.cols(), data)
}

fn dual_update(u: &DenseMatrix, x: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
    u.zip_map(x, |a, b| a + b).zip_map(y, |a, b| a - b)
}

/// One sweep of the convex-first order: project the blend onto the convex
/// set, truncate `X + U`, then take the dual step `U + X - Y`.
pub fn admm_step_convex_first(
    problem: &RlraProblem,
    state: &AdmmState,
    config: &AdmmConfig,
) -> Result<StepOutcome> {
    config.validate()?;
    let blend = x_update_target(&problem.target, &state.y, &state.u, config.rho)?;
    let projected = project(&problem.constraint, &blend)?;
    let x = projected.point;
    let y = truncated_svd(&x.add(&state.u), problem.rank_bound)?;
    let u = dual_update(&state.u, &x, &y);
    Ok(StepOutcome {
        state: AdmmState { x, y, u },
        projection_converged: projected.converged,
    })
}

/// One sweep of the rank-first order: truncate the blend, project `X + U`
/// onto the convex set, then take the dual step `U + X - Y`.
pub fn admm_step_rank_first(
    problem: &RlraProblem,
    state: &AdmmState,
    config: &AdmmConfig,
) -> Result<StepOutcome> {
    config.validate()?;
    let blend = x_update_target(&problem.target, &state.y, &state.u, config.rho)?;
    let x = truncated_svd(&blend, problem.rank_bound)?;
    let projected = project(&problem.constraint, &x.add(&state.u))?;
    let y = projected.point;
    let u = dual_update(&state.u, &x, &y);
    Ok(StepOutcome {
        state: AdmmState { x, y, u },
        projection_converged: projected.converged,
    })
}

fn initial_y(problem: &RlraProblem, init: InitStrategy) -> Result<DenseMatrix> {
    let (rows, cols) = problem.target.shape();
    Ok(match init {
        InitStrategy::TruncatedTarget => truncated_svd(&problem.target, problem.rank_bound)?,
        InitStrategy::Zeros => DenseMatrix::zeros(rows, cols),
        InitStrategy::TargetCopy => problem.target.clone(),
        InitStrategy::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
        }
    })
}

fn feasibility_flags(problem: &RlraProblem, state: &AdmmState, order: UpdateOrder) -> Result<(bool, bool)> {
    // The truncation output has rank <= K by construction, so only the
    // projection-side iterate needs a singular value check.
    let x_member = membership(&problem.constraint, &state.x, FEASIBILITY_TOL)?;
    let y_member = membership(&problem.constraint, &state.y, FEASIBILITY_TOL)?;
    let (x_rank_ok, y_rank_ok) = match order {
        UpdateOrder::ConvexFirst => (
            numerical_rank(&state.x, FEASIBILITY_TOL)? <= problem.rank_bound,
            true,
        ),
        UpdateOrder::RankFirst => (
            true,
            numerical_rank(&state.y, FEASIBILITY_TOL)? <= problem.rank_bound,
        ),
    };
    Ok((x_member && x_rank_ok, y_member && y_rank_ok))
}

/// Runs ADMM until both stopping thresholds hold or the iteration cap hits.
///
/// Non-convergence never raises an error; the termination field encodes it.
/// After the residuals converge, the iterate produced by the last update is
/// accepted only if it passes both feasibility checks at [`FEASIBILITY_TOL`];
/// otherwise the report is marked [`Termination::Stalled`].
pub fn admm_solve(problem: &RlraProblem, config: &AdmmConfig) -> Result<SolveReport> {
    config.validate()?;
    let y0 = initial_y(problem, config.init)?;
    let mut state = AdmmState {
        x: y0.clone(),
        y: y0,
        u: DenseMatrix::zeros(problem.target.rows(), problem.target.cols()),
    };
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut prev_x: Option<DenseMatrix> = None;
    let mut termination = Termination::IterCap;

    for iter in 1..=config.max_iters {
        let prev_y = state.y.clone();
        let outcome = match config.order {
            UpdateOrder::ConvexFirst => admm_step_convex_first(problem, &state, config)?,
            UpdateOrder::RankFirst => admm_step_rank_first(problem, &state, config)?,
        };
        state = outcome.state;

        let objective = frob_dist(&state.x, &problem.target)?;
        let primal_residual = frob_dist(&state.x, &state.y)?;
        let dual_change = config.rho * frob_dist(&state.y, &prev_y)?;
        let x_step = match &prev_x {
            Some(p) => Some(frob_dist(&state.x, p)?),
            None => None,
        };
        let (x_feasible, y_feasible) = feasibility_flags(problem, &state, config.order)?;
        trace.push(IterationRecord {
            iter,
            objective,
            primal_residual,
            dual_change,
            x_step,
            x_feasible,
            y_feasible,
            projection_converged: outcome.projection_converged,
        });
        prev_x = Some(state.x.clone());

        if primal_residual <= config.primal_tol && dual_change <= config.dual_change_tol {
            termination = Termination::Converged;
            break;
        }
    }

    if termination == Termination::Converged {
        // X is exact on one constraint class by construction; snap only if it
        // also passes the other one.
        let snapped = match config.order {
            UpdateOrder::ConvexFirst => {
                numerical_rank(&state.x, FEASIBILITY_TOL)? <= problem.rank_bound
                    && membership(&problem.constraint, &state.x, FEASIBILITY_TOL)?
            }
            UpdateOrder::RankFirst => {
                membership(&problem.constraint, &state.x, FEASIBILITY_TOL)?
            }
        };
        if !snapped {
            termination = Termination::Stalled;
        }
    }

    Ok(SolveReport {
        x_final: state.x,
        y_final: state.y,
        u_final: state.u,
        trace,
        termination,
    })
}

/// Result of extracting a rank-1 factor from an approximately PSD matrix.
#[derive(Clone, Debug)]
pub struct Rank1Recovery {
    /// `sqrt(sigma_1) * u_1`, sign-fixed so the first component that is not
    /// numerically zero is positive.
    pub vector: Vec<f64>,
    /// Set when the matrix has an eigenvalue below `-1e-6 * sigma_1`.
    pub psd_warning: bool,
}

/// Extracts `sqrt(sigma_1) * u_1` from a symmetric matrix, flagging inputs
/// that are far from PSD. Fails on non-square or visibly asymmetric inputs.
pub fn recover_rank1_vector(x: &DenseMatrix) -> Result<Rank1Recovery> {
    if !x.is_square() {
        return Err(Error::invalid("rank-1 recovery needs a square matrix"));
    }
    if x.sub(&x.transpose()).max_abs() > 1e-6 {
        return Err(Error::invalid(
            "rank-1 recovery needs a matrix symmetric to 1e-6",
        ));
    }
    let sym = x.zip_map(&x.transpose(), |a, b| 0.5 * (a + b));
    let (values, vectors) = symmetric_eigen(&sym)?;
    let n = x.rows();
    let mut top = 0;
    for t in 1..n {
        if values[t].abs() > values[top].abs() {
            top = t;
        }
    }
    let sigma1 = values[top].abs();
    // Sorted descending, so the minimum sits at the end.
    let min_lambda = values.last().copied().unwrap_or(f64::INFINITY);
    let psd_warning = min_lambda < -1e-6 * sigma1;

    let scale = sigma1.sqrt();
    let mut vector: Vec<f64> = (0..n).map(|i| scale * vectors[(i, top)]).collect();
    if let Some(first) = vector.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            for v in vector.iter_mut() {
                *v = -*v;
            }
        }
    }
    Ok(Rank1Recovery {
        vector,
        psd_warning,
    })
}
