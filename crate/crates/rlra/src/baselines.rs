//! Reference methods the ADMM solver is compared against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admm::{RlraProblem, Termination, FEASIBILITY_TOL};
use crate::constraints::{membership, project};
use crate::error::{Error, Result};
use crate::matrix::{frob_dist, numerical_rank, svd, truncated_svd, DenseMatrix};

/// Guard added to multiplicative-update denominators.
const NMF_EPS: f64 = 1e-12;

/// Outcome of a baseline method.
#[derive(Clone, Debug)]
pub struct BaselineReport {
    pub x_final: DenseMatrix,
    /// `|X - target|_F` after each iteration; never empty.
    pub trace: Vec<f64>,
    /// Only [`Termination::Converged`] or [`Termination::IterCap`].
    pub termination: Termination,
    /// The final iterate passes membership and rank checks at
    /// [`FEASIBILITY_TOL`].
    pub feasible: bool,
}

impl BaselineReport {
    pub fn final_objective(&self) -> f64 {
        *self.trace.last().expect("baseline traces are never empty")
    }
}

fn full_feasibility(problem: &RlraProblem, x: &DenseMatrix) -> Result<bool> {
    Ok(membership(problem.constraint(), x, FEASIBILITY_TOL)?
        && numerical_rank(x, FEASIBILITY_TOL)? <= problem.rank_bound())
}

/// Alternating direct projection: truncate, project, repeat from the target.
///
/// Stops once successive iterates move by at most `tol`. Feasible iterates
/// are honest solutions, so their objectives upper-bound the optimum, but the
/// scheme can stall on infeasible cycles.
pub fn adp_solve(problem: &RlraProblem, max_iters: usize, tol: f64) -> Result<BaselineReport> {
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut x = problem.target().clone();
    let mut trace = Vec::new();
    let mut termination = Termination::IterCap;
    for _ in 0..max_iters {
        let truncated = truncated_svd(&x, problem.rank_bound())?;
        let next = project(problem.constraint(), &truncated)?.point;
        trace.push(frob_dist(&next, problem.target())?);
        let moved = frob_dist(&next, &x)?;
        x = next;
        if moved <= tol {
            termination = Termination::Converged;
            break;
        }
    }
    let feasible = full_feasibility(problem, &x)?;
    Ok(BaselineReport {
        x_final: x,
        trace,
        termination,
        feasible,
    })
}

/// Plain truncated SVD of the target: optimal for the rank bound alone and
/// therefore a lower bound on every constrained objective, but possibly
/// infeasible for the convex constraint.
pub fn tsvd_baseline(problem: &RlraProblem) -> Result<BaselineReport> {
    let x = truncated_svd(problem.target(), problem.rank_bound())?;
    let trace = vec![frob_dist(&x, problem.target())?];
    let feasible = full_feasibility(problem, &x)?;
    Ok(BaselineReport {
        x_final: x,
        trace,
        termination: Termination::Converged,
        feasible,
    })
}

/// Non-negative matrix factorization with multiplicative updates.
///
/// Factors start from the absolute values of the truncated SVD, plus a tiny
/// seeded jitter that keeps zero entries from locking. The update scheme
/// never increases the objective, and `X = A * B` has rank at most `k` and
/// non-negative entries by construction.
pub fn nmf_solve(
    target: &DenseMatrix,
    k: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<BaselineReport> {
    if k == 0 {
        return Err(Error::invalid("factor rank must be at least 1"));
    }
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if target.data().iter().any(|v| *v < 0.0) {
        return Err(Error::invalid(
            "multiplicative updates need a non-negative target",
        ));
    }

    let (rows, cols) = target.shape();
    let triple = svd(target)?;
    let r = triple.sigma.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter_amp = 1e-6 * (1.0 + triple.sigma.first().copied().unwrap_or(0.0).sqrt());
    let mut a = DenseMatrix::from_fn(rows, k, |i, t| {
        let base = if t < r {
            (triple.sigma[t].sqrt() * triple.u[(i, t)]).abs()
        } else {
            0.0
        };
        base + jitter_amp * rng.random::<f64>()
    });
    let mut b = DenseMatrix::from_fn(k, cols, |t, j| {
        let base = if t < r {
            (triple.sigma[t].sqrt() * triple.v[(j, t)]).abs()
        } else {
            0.0
        };
        base + jitter_amp * rng.random::<f64>()
    });

    let mut trace = Vec::new();
    let mut termination = Termination::IterCap;
    let mut previous = f64::INFINITY;
    for _ in 0..max_iters {
        // A <- A .* (X B^T) ./ (A B B^T + eps)
        let bt = b.transpose();
        let numer_a = target.matmul(&bt);
        let denom_a = a.matmul(&b.matmul(&bt));
        a = DenseMatrix::from_fn(rows, k, |i, t| {
            a[(i, t)] * numer_a[(i, t)] / (denom_a[(i, t)] + NMF_EPS)
        });

        // B <- B .* (A^T X) ./ (A^T A B + eps)
        let at = a.transpose();
        let numer_b = at.matmul(target);
        let denom_b = at.matmul(&a).matmul(&b);
        b = DenseMatrix::from_fn(k, cols, |t, j| {
            b[(t, j)] * numer_b[(t, j)] / (denom_b[(t, j)] + NMF_EPS)
        });

        let objective = frob_dist(&a.matmul(&b), target)?;
        trace.push(objective);
        if (previous - objective).abs() <= tol * previous.max(1.0) && previous.is_finite() {
            termination = Termination::Converged;
            break;
        }
        previous = objective;
    }

    let x = a.matmul(&b);
    let feasible = x.data().iter().all(|v| *v >= 0.0);
    Ok(BaselineReport {
        x_final: x,
        trace,
        termination,
        feasible,
    })
}
