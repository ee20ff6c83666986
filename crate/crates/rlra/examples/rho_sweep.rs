//! How the penalty weight shapes convergence speed.
//!
//! Sweeps rho over a small grid on one non-negative instance and reports how
//! many iterations each run needs to push the primal residual under 1e-4.
//!
//! Run with: cargo run -p rlra --example rho_sweep

use rlra::admm::{admm_solve, AdmmConfig, RlraProblem};
use rlra::constraints::ConstraintSpec;
use rlra::experiments::gen_nonneg_instance;

const THRESHOLD: f64 = 1e-4;

fn main() -> rlra::Result<()> {
    let target = gen_nonneg_instance(30, 20, 11)?;
    let problem = RlraProblem::new(target, 3, ConstraintSpec::NonNegative)?;

    println!("30x20 non-negative instance, K = 3");
    println!("{:>6} {:>12} {:>22} {:>14}", "rho", "iterations", "primal residual", "to 1e-4");

    let mut to_threshold: Vec<Option<usize>> = Vec::new();
    for rho in [1.0, 5.0, 9.0, 15.0] {
        let config = AdmmConfig {
            rho,
            ..AdmmConfig::default()
        };
        let report = admm_solve(&problem, &config)?;
        let hit = report
            .trace
            .iter()
            .position(|r| r.primal_residual <= THRESHOLD)
            .map(|i| i + 1);
        println!(
            "{:>6} {:>12} {:>22.3e} {:>14}",
            rho,
            report.iterations(),
            report.final_primal_residual(),
            hit.map_or("never".to_string(), |n| n.to_string()),
        );
        to_threshold.push(hit);
    }

    // Small rho barely couples the two blocks, so the residual drifts down
    // slowly; larger weights buy speed on this instance.
    for pair in to_threshold[1..].windows(2) {
        let (a, b) = (pair[0].expect("rho >= 5 converges"), pair[1].expect("rho >= 5 converges"));
        assert!(b <= a, "iterations to threshold should not grow with rho here");
    }
    println!();
    println!("verified: iterations to the threshold shrink (weakly) from rho 5 to 15");
    Ok(())
}
