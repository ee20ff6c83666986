//! Command-line front end for the experiment runners.
//!
//! Settings come from an optional JSON config file (`--config`); individual
//! flags override single fields. Exit codes: 0 on success, 1 on validation
//! or I/O errors, 2 when `--require-convergence` is set and a solve stopped
//! on its iteration cap or stalled.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use rlra::admm::{Termination, UpdateOrder};
use rlra::experiments::io::fmt_float;
use rlra::experiments::runners::{
    run_denoise, run_fixed_points, run_fsr_sdpr, run_nonneg_experiment, run_rho_sweep, run_solve,
};
use rlra::experiments::ExperimentConfig;
use rlra::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "rlra",
    version,
    about = "Low-rank approximation under convex constraints",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// JSON config file. Flags below override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Penalty parameter rho.
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Rank bound K.
    #[arg(long, global = true, value_name = "K")]
    rank_bound: Option<usize>,

    /// Synthetic instance height.
    #[arg(long, global = true)]
    rows: Option<usize>,

    /// Synthetic instance width.
    #[arg(long, global = true)]
    cols: Option<usize>,

    /// Iteration cap.
    #[arg(long, global = true)]
    max_iters: Option<usize>,

    /// Stopping tolerance on |X - Y|_F.
    #[arg(long, global = true)]
    primal_tol: Option<f64>,

    /// Stopping tolerance on rho * |Y - Y_prev|_F.
    #[arg(long, global = true)]
    dual_change_tol: Option<f64>,

    /// Update order: convex_first or rank_first.
    #[arg(long, global = true, value_name = "ORDER")]
    order: Option<String>,

    /// Directory for output artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Input matrix (CSV) or image (PGM for denoise) instead of synthetic data.
    #[arg(long, global = true, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Gaussian noise level for denoise.
    #[arg(long, global = true)]
    noise_sigma: Option<f64>,

    /// Fraction of entries pinned to clean values in denoise.
    #[arg(long, global = true)]
    pin_fraction: Option<f64>,

    /// Fail (exit 2) when a solve does not converge.
    #[arg(long, global = true)]
    require_convergence: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance under the configured constraint.
    Solve,
    /// Compare the solver against alternating projection and multiplicative
    /// updates on a non-negative instance.
    Nonneg,
    /// Trace convergence speed across a grid of penalty values.
    RhoSweep,
    /// Recover a noisy low-rank image with a few clean pixels pinned.
    Denoise,
    /// Enumerate fixed points of the rank-first iteration map.
    FixedPoints,
    /// Rank-bounded semidefinite recovery with linear trace constraints.
    FsrSdpr,
}

fn parse_order(raw: &str) -> Result<UpdateOrder> {
    match raw.replace('-', "_").as_str() {
        "convex_first" => Ok(UpdateOrder::ConvexFirst),
        "rank_first" => Ok(UpdateOrder::RankFirst),
        other => Err(Error::invalid(format!(
            "unknown order {other:?}; expected convex_first or rank_first"
        ))),
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.rho {
        config.rho = v;
    }
    if let Some(v) = cli.rank_bound {
        config.rank_bound = v;
    }
    if let Some(v) = cli.rows {
        config.rows = v;
    }
    if let Some(v) = cli.cols {
        config.cols = v;
    }
    if let Some(v) = cli.max_iters {
        config.max_iters = v;
    }
    if let Some(v) = cli.primal_tol {
        config.primal_tol = v;
    }
    if let Some(v) = cli.dual_change_tol {
        config.dual_change_tol = v;
    }
    if let Some(raw) = &cli.order {
        config.order = parse_order(raw)?;
    }
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(path) = &cli.input {
        config.input_path = Some(path.clone());
    }
    if let Some(v) = cli.noise_sigma {
        config.noise_sigma = v;
    }
    if let Some(v) = cli.pin_fraction {
        config.pin_fraction = v;
    }
    if cli.require_convergence {
        config.require_convergence = true;
    }
    config.validate()?;
    Ok(config)
}

fn describe(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::IterCap => "hit the iteration cap",
        Termination::Stalled => "stalled",
    }
}

/// Runs the chosen experiment. Returns whether every solve converged.
fn dispatch(command: &Command, config: &ExperimentConfig) -> Result<bool> {
    match command {
        Command::Solve => {
            let outcome = run_solve(config)?;
            let report = &outcome.report;
            println!(
                "solve: {} after {} iterations (objective {}, primal residual {}, feasible: {})",
                describe(report.termination),
                report.iterations(),
                fmt_float(report.final_objective()),
                fmt_float(report.final_primal_residual()),
                outcome.feasible,
            );
            println!(
                "wrote {} {} {}",
                outcome.solution_csv.display(),
                outcome.trace_csv.display(),
                outcome.summary_csv.display()
            );
            Ok(report.termination == Termination::Converged)
        }
        Command::Nonneg => {
            let outcome = run_nonneg_experiment(config)?;
            let mut all_converged = true;
            for result in &outcome.results {
                all_converged &= result.admm.termination == Termination::Converged;
                println!(
                    "K={}: admm {} ({} iters, objective {}), adp objective {}, nmf objective {}",
                    result.k,
                    describe(result.admm.termination),
                    result.admm.iterations(),
                    fmt_float(result.admm.final_objective()),
                    fmt_float(result.adp.final_objective()),
                    fmt_float(result.nmf.final_objective()),
                );
                println!("wrote {}", result.trace_csv.display());
            }
            println!("wrote {}", outcome.instance_csv.display());
            Ok(all_converged)
        }
        Command::RhoSweep => {
            let outcome = run_rho_sweep(config)?;
            let mut all_converged = true;
            for row in &outcome.rows {
                all_converged &= row.report.termination == Termination::Converged;
                let reached = match row.iterations_to_threshold {
                    Some(iter) => format!("residual threshold at iteration {iter}"),
                    None => "threshold not reached".to_string(),
                };
                println!(
                    "rho={}: {} after {} iterations, {}",
                    row.rho,
                    describe(row.report.termination),
                    row.report.iterations(),
                    reached,
                );
            }
            println!("wrote {}", outcome.sweep_csv.display());
            Ok(all_converged)
        }
        Command::Denoise => {
            let outcome = run_denoise(config)?;
            for row in &outcome.rows {
                println!(
                    "{}: psnr {} dB, snr {} dB, feasible: {}",
                    row.label,
                    fmt_float(row.metrics.psnr),
                    fmt_float(row.metrics.snr),
                    row.feasible,
                );
            }
            println!(
                "solver {} after {} iterations; {} pinned entries ({}), solution rank {}",
                describe(outcome.report.termination),
                outcome.report.iterations(),
                outcome.pin_count,
                if outcome.pins_exact {
                    "all exact"
                } else {
                    "pin mismatch"
                },
                outcome.rlra_rank,
            );
            println!(
                "wrote {} {} {} {} {}",
                outcome.clean_pgm.display(),
                outcome.noisy_pgm.display(),
                outcome.tsvd_pgm.display(),
                outcome.rlra_pgm.display(),
                outcome.metrics_csv.display()
            );
            Ok(outcome.report.termination == Termination::Converged)
        }
        Command::FixedPoints => {
            let outcome = run_fixed_points(config)?;
            for row in &outcome.rows {
                println!(
                    "alpha={}: {} fixed points out of {} subsets",
                    row.alpha,
                    row.subsets.len(),
                    row.count_bound,
                );
            }
            println!("wrote {}", outcome.csv_path.display());
            Ok(true)
        }
        Command::FsrSdpr => {
            let outcome = run_fsr_sdpr(config)?;
            for row in &outcome.rows {
                println!(
                    "{}: gap {}, trace_ok {}, psd_ok {}, rank_ok {}, feasible {}",
                    row.method, fmt_float(row.objective), row.trace_ok, row.psd_ok, row.rank_ok,
                    row.feasible,
                );
            }
            if let Some(v) = &outcome.recovered_vector {
                let parts: Vec<String> = v.iter().map(|x| fmt_float(*x)).collect();
                println!("recovered factor: [{}]", parts.join(", "));
                if outcome.psd_warning {
                    println!("warning: solution has non-trivial negative curvature");
                }
            }
            println!(
                "wrote {} {}",
                outcome.solution_csv.display(),
                outcome.summary_csv.display()
            );
            Ok(outcome.report.termination == Termination::Converged)
        }
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help and --version land here; they are not errors.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    match dispatch(&cli.command, &config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if config.require_convergence => {
            eprintln!("error: solver did not converge and --require-convergence is set");
            ExitCode::from(2)
        }
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
