//! Non-negative low-rank approximation: the splitting solver against two
//! classic baselines on the same instance.
//!
//! Run with: cargo run -p rlra --example nonneg_lra

use rlra::admm::{admm_solve, AdmmConfig, RlraProblem, Termination, FEASIBILITY_TOL};
use rlra::baselines::{adp_solve, nmf_solve};
use rlra::constraints::{membership, ConstraintSpec};
use rlra::experiments::gen_nonneg_instance;
use rlra::matrix::numerical_rank;

fn main() -> rlra::Result<()> {
    let target = gen_nonneg_instance(30, 20, 7)?;
    let k = 4;

    println!("target: 30x20 uniform random, rank bound K = {k}, constraint: X >= 0");
    println!();

    let problem = RlraProblem::new(target.clone(), k, ConstraintSpec::NonNegative)?;
    let config = AdmmConfig::default();
    let report = admm_solve(&problem, &config)?;
    println!(
        "admm   : objective {:.6} after {} iterations ({:?})",
        report.final_objective(),
        report.iterations(),
        report.termination
    );

    let adp = adp_solve(&problem, config.max_iters, config.primal_tol)?;
    println!(
        "adp    : objective {:.6} after {} iterations (feasible: {})",
        adp.final_objective(),
        adp.trace.len(),
        adp.feasible
    );

    let nmf = nmf_solve(&target, k, config.max_iters, config.primal_tol, 7)?;
    println!(
        "nmf    : objective {:.6} after {} iterations",
        nmf.final_objective(),
        nmf.trace.len()
    );

    // The solver's output must be a genuine solution: non-negative, within
    // the rank bound, and at least as good as direct alternating projection.
    assert_eq!(report.termination, Termination::Converged);
    assert!(membership(problem.constraint(), &report.x_final, FEASIBILITY_TOL)?);
    assert!(numerical_rank(&report.x_final, FEASIBILITY_TOL)? <= k);
    assert!(report.final_objective() <= adp.final_objective() + 1e-9);
    println!();
    println!("verified: solution feasible, rank <= {k}, objective beats adp");
    Ok(())
}
