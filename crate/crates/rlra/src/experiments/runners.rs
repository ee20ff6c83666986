//! End-to-end experiment drivers.
//!
//! Each runner builds its instance from the config (or loads one from
//! `input_path`), solves it, and writes CSV/PGM artifacts into
//! `output_dir`. Runners are single threaded and seed every random stream,
//! so the same config always produces byte-identical files.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::{
    admm_solve, recover_rank1_vector, RlraProblem, SolveReport, Termination,
};
use crate::baselines::{adp_solve, nmf_solve, tsvd_baseline, BaselineReport};
use crate::constraints::{membership, ConstraintSpec};
use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::instances::{
    add_gaussian_noise, gen_nonneg_instance, synth_low_rank_image,
};
use crate::experiments::io::{
    fmt_float, read_matrix_csv, read_pgm, write_csv_rows, write_matrix_csv, write_pgm,
};
use crate::experiments::metrics::{quality, QualityMetrics};
use crate::fixed_point::{enumerate_fixed_points, HMapContext};
use crate::matrix::{frob_dist, numerical_rank, svd, truncated_svd, DenseMatrix};

/// Residual level used when comparing how fast different penalties drive the
/// iterates together.
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;

/// Tolerance for the feasibility flags written into experiment artifacts.
/// Looser than the solver's internal extraction gate: a run that stops just
/// short of full convergence still emits an honestly labeled result.
pub const ARTIFACT_FEASIBILITY_TOL: f64 = 1e-5;

fn ensure_output_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&config.output_dir)?;
    Ok(config.output_dir.clone())
}

fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::IterCap => "iter_cap",
        Termination::Stalled => "stalled",
    }
}

fn resolve_constraint(
    config: &ExperimentConfig,
    rows: usize,
    cols: usize,
) -> Result<ConstraintSpec> {
    match &config.constraint {
        Some(c) => c.resolve(rows, cols),
        None => Ok(ConstraintSpec::NonNegative),
    }
}

fn solution_feasible(x: &DenseMatrix, constraint: &ConstraintSpec, k: usize) -> Result<bool> {
    Ok(membership(constraint, x, ARTIFACT_FEASIBILITY_TOL)?
        && numerical_rank(x, ARTIFACT_FEASIBILITY_TOL)? <= k)
}

/// Per-rank result of the non-negative comparison.
#[derive(Clone, Debug)]
pub struct NonnegKResult {
    pub k: usize,
    pub admm: SolveReport,
    pub admm_feasible: bool,
    pub adp: BaselineReport,
    pub nmf: BaselineReport,
    pub trace_csv: PathBuf,
}

#[derive(Clone, Debug)]
pub struct NonnegOutcome {
    pub instance_csv: PathBuf,
    pub results: Vec<NonnegKResult>,
}

/// Compare the splitting solver against alternating projection and
/// multiplicative-update factorization on a non-negative instance, one run
/// per rank bound in `k_list`.
///
/// Writes `nonneg_instance.csv` plus one `nonneg_K{k}.csv` per rank with
/// columns `iter,admm_obj,adp_obj,nmf_obj`; shorter traces repeat their final
/// value so every row is complete.
pub fn run_nonneg_experiment(config: &ExperimentConfig) -> Result<NonnegOutcome> {
    config.validate()?;
    let out = ensure_output_dir(config)?;
    let target = match &config.input_path {
        Some(path) => read_matrix_csv(path)?,
        None => gen_nonneg_instance(config.rows, config.cols, config.seed)?,
    };
    let instance_csv = out.join("nonneg_instance.csv");
    write_matrix_csv(&instance_csv, &target)?;

    let mut results = Vec::with_capacity(config.k_list.len());
    for &k in &config.k_list {
        let problem = RlraProblem::new(target.clone(), k, ConstraintSpec::NonNegative)?;
        let admm = admm_solve(&problem, &config.admm_config())?;
        let adp = adp_solve(&problem, config.max_iters, config.primal_tol)?;
        let nmf = nmf_solve(&target, k, config.max_iters, config.primal_tol, config.seed)?;
        let admm_feasible = solution_feasible(&admm.x_final, problem.constraint(), k)?;

        let admm_objs: Vec<f64> = admm.trace.iter().map(|r| r.objective).collect();
        let len = admm_objs.len().max(adp.trace.len()).max(nmf.trace.len());
        let last = |t: &[f64], i: usize| t[i.min(t.len() - 1)];
        let mut rows = Vec::with_capacity(len);
        for i in 0..len {
            rows.push(vec![
                (i + 1).to_string(),
                fmt_float(last(&admm_objs, i)),
                fmt_float(last(&adp.trace, i)),
                fmt_float(last(&nmf.trace, i)),
            ]);
        }
        let trace_csv = out.join(format!("nonneg_K{k}.csv"));
        write_csv_rows(&trace_csv, "iter,admm_obj,adp_obj,nmf_obj", &rows)?;

        results.push(NonnegKResult {
            k,
            admm,
            admm_feasible,
            adp,
            nmf,
            trace_csv,
        });
    }
    Ok(NonnegOutcome {
        instance_csv,
        results,
    })
}

/// One penalty setting within a sweep.
#[derive(Clone, Debug)]
pub struct RhoSweepRow {
    pub rho: f64,
    pub report: SolveReport,
    /// First iteration whose primal residual drops to
    /// [`RESIDUAL_THRESHOLD`], if any.
    pub iterations_to_threshold: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RhoSweepOutcome {
    pub sweep_csv: PathBuf,
    pub rows: Vec<RhoSweepRow>,
}

/// Solve one instance under every penalty in `rho_list` and record the full
/// residual trajectories in `rho_sweep.csv` (`iter,rho,residual,objective`,
/// grouped by penalty).
pub fn run_rho_sweep(config: &ExperimentConfig) -> Result<RhoSweepOutcome> {
    config.validate()?;
    let out = ensure_output_dir(config)?;
    let target = match &config.input_path {
        Some(path) => read_matrix_csv(path)?,
        None => gen_nonneg_instance(config.rows, config.cols, config.seed)?,
    };
    let constraint = resolve_constraint(config, target.rows(), target.cols())?;

    let mut csv_rows = Vec::new();
    let mut rows = Vec::with_capacity(config.rho_list.len());
    for &rho in &config.rho_list {
        let mut admm_cfg = config.admm_config();
        admm_cfg.rho = rho;
        let problem = RlraProblem::new(target.clone(), config.rank_bound, constraint.clone())?;
        let report = admm_solve(&problem, &admm_cfg)?;
        let iterations_to_threshold = report
            .trace
            .iter()
            .find(|r| r.primal_residual <= RESIDUAL_THRESHOLD)
            .map(|r| r.iter);
        for r in &report.trace {
            csv_rows.push(vec![
                r.iter.to_string(),
                fmt_float(rho),
                fmt_float(r.primal_residual),
                fmt_float(r.objective),
            ]);
        }
        rows.push(RhoSweepRow {
            rho,
            report,
            iterations_to_threshold,
        });
    }
    let sweep_csv = out.join("rho_sweep.csv");
    write_csv_rows(&sweep_csv, "iter,rho,residual,objective", &csv_rows)?;
    Ok(RhoSweepOutcome { sweep_csv, rows })
}

/// Metrics for one reconstruction in the denoising experiment.
#[derive(Clone, Debug)]
pub struct DenoiseImageRow {
    pub label: &'static str,
    pub metrics: QualityMetrics,
    /// Satisfies the pins and the rank bound.
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct DenoiseOutcome {
    pub clean_pgm: PathBuf,
    pub noisy_pgm: PathBuf,
    pub tsvd_pgm: PathBuf,
    pub rlra_pgm: PathBuf,
    pub metrics_csv: PathBuf,
    /// Metric rows for noisy, tsvd, rlra, in that order.
    pub rows: Vec<DenoiseImageRow>,
    pub report: SolveReport,
    pub pin_count: usize,
    /// Every pinned entry of the solution equals the clean value bit for bit.
    pub pins_exact: bool,
    pub rlra_rank: usize,
}

/// Denoise a low-rank image: corrupt it with Gaussian noise, reveal a random
/// fraction of clean pixels as hard pins, and recover it under the rank
/// bound. Compares against plain rank truncation of the noisy image.
///
/// Randomness splits into three streams derived from the master seed: the
/// image itself (`seed`), the noise (`seed + 1`), and the pin locations
/// (`seed + 2`). Metrics are computed against the clean image in unclipped
/// floating point; clamping to [0, 255] happens only at PGM export.
pub fn run_denoise(config: &ExperimentConfig) -> Result<DenoiseOutcome> {
    config.validate()?;
    let out = ensure_output_dir(config)?;
    let clean = match &config.input_path {
        Some(path) => read_pgm(path)?,
        None => synth_low_rank_image(
            config.image_rows,
            config.image_cols,
            config.rank_bound,
            config.seed,
        )?,
    };
    let k = config.rank_bound;
    let noisy = add_gaussian_noise(&clean, config.noise_sigma, config.seed + 1)?;

    let total = clean.rows() * clean.cols();
    let pin_count = ((config.pin_fraction * total as f64).ceil() as usize).min(total);
    let mut indices: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed + 2);
    indices.shuffle(&mut rng);
    let mut mask = vec![false; total];
    for &idx in indices.iter().take(pin_count) {
        mask[idx] = true;
    }
    let constraint = ConstraintSpec::fixed_entries(mask.clone(), clean.clone())?;

    let problem = RlraProblem::new(noisy.clone(), k, constraint.clone())?;
    let report = admm_solve(&problem, &config.admm_config())?;
    let tsvd_image = truncated_svd(&noisy, k)?;

    let pins_exact = mask
        .iter()
        .enumerate()
        .all(|(idx, &pinned)| !pinned || report.x_final.data()[idx].to_bits() == clean.data()[idx].to_bits());
    let rlra_rank = numerical_rank(&report.x_final, 1e-6)?;

    let mut rows = Vec::with_capacity(3);
    for (label, image) in [
        ("noisy", &noisy),
        ("tsvd", &tsvd_image),
        ("rlra", &report.x_final),
    ] {
        rows.push(DenoiseImageRow {
            label,
            metrics: quality(&clean, image, 255.0)?,
            feasible: solution_feasible(image, &constraint, k)?,
        });
    }

    let clean_pgm = out.join("denoise_clean.pgm");
    let noisy_pgm = out.join("denoise_noisy.pgm");
    let tsvd_pgm = out.join("denoise_tsvd.pgm");
    let rlra_pgm = out.join("denoise_rlra.pgm");
    write_pgm(&clean_pgm, &clean)?;
    write_pgm(&noisy_pgm, &noisy)?;
    write_pgm(&tsvd_pgm, &tsvd_image)?;
    write_pgm(&rlra_pgm, &report.x_final)?;

    let metrics_csv = out.join("denoise_metrics.csv");
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.to_string(),
                fmt_float(r.metrics.psnr),
                fmt_float(r.metrics.snr),
                fmt_float(r.metrics.mse),
                r.feasible.to_string(),
            ]
        })
        .collect();
    write_csv_rows(&metrics_csv, "image,psnr,snr,mse,feasible", &csv_rows)?;

    Ok(DenoiseOutcome {
        clean_pgm,
        noisy_pgm,
        tsvd_pgm,
        rlra_pgm,
        metrics_csv,
        rows,
        report,
        pin_count,
        pins_exact,
        rlra_rank,
    })
}

fn trace_satisfied(spec: &ConstraintSpec, x: &DenseMatrix, tol: f64) -> bool {
    match spec {
        ConstraintSpec::TraceHyperplane { a, b } => (x.inner(a) - b).abs() <= tol,
        ConstraintSpec::TraceHalfSpace { a, b } => x.inner(a) >= b - tol,
        _ => true,
    }
}

/// One method's scorecard in the feasibility-restricted run.
#[derive(Clone, Debug)]
pub struct FsrMethodRow {
    pub method: &'static str,
    /// Frobenius distance to the target.
    pub objective: f64,
    /// All linear constraints hold to 1e-5.
    pub trace_ok: bool,
    /// Symmetric with smallest eigenvalue above -1e-6.
    pub psd_ok: bool,
    /// Numerical rank within the bound at tolerance 1e-6.
    pub rank_ok: bool,
    /// Full feasibility at the solver tolerance.
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct FsrOutcome {
    pub target: DenseMatrix,
    pub rank_bound: usize,
    pub report: SolveReport,
    pub tsvd: BaselineReport,
    /// Rows for `admm` and `tsvd`, in that order.
    pub rows: Vec<FsrMethodRow>,
    pub solution_csv: PathBuf,
    pub summary_csv: PathBuf,
    /// Present when the solution is square, symmetric, and rank bounded by 1.
    pub recovered_vector: Option<Vec<f64>>,
    pub vector_csv: Option<PathBuf>,
    /// True when rank-one recovery saw meaningful negative curvature.
    pub psd_warning: bool,
}

/// Fixed-score low-rank recovery under semidefinite and linear constraints:
/// find the nearest matrix to the target that is PSD, satisfies every trace
/// constraint, and respects the rank bound. Plain truncation generally
/// violates the linear constraints; the splitting solver restores them.
///
/// Without `input_path` this runs a built-in 2x2 instance (off-diagonal 0.9,
/// unit diagonal) with its trace pinned to 2 and rank bound 1. A custom
/// input requires `trace_constraints` in the config.
pub fn run_fsr_sdpr(config: &ExperimentConfig) -> Result<FsrOutcome> {
    config.validate()?;
    let out = ensure_output_dir(config)?;

    let (target, k) = match &config.input_path {
        Some(path) => {
            if config.trace_constraints.is_none() {
                return Err(Error::invalid(
                    "custom fsr inputs need trace_constraints in the config",
                ));
            }
            (read_matrix_csv(path)?, config.rank_bound)
        }
        None => (
            DenseMatrix::new(2, 2, vec![1.0, 0.9, 0.9, 1.0])?,
            1,
        ),
    };

    let trace_specs: Vec<ConstraintSpec> = match &config.trace_constraints {
        Some(list) => {
            if list.is_empty() {
                return Err(Error::invalid("trace_constraints must not be empty"));
            }
            list.iter()
                .map(|tc| tc.resolve(target.rows(), target.cols()))
                .collect::<Result<_>>()?
        }
        None => vec![ConstraintSpec::TraceHyperplane {
            a: DenseMatrix::identity(target.rows()),
            b: 2.0,
        }],
    };

    let mut sets = vec![ConstraintSpec::PsdCone];
    sets.extend(trace_specs.iter().cloned());
    let constraint = ConstraintSpec::Intersection(sets);

    let problem = RlraProblem::new(target.clone(), k, constraint.clone())?;
    let report = admm_solve(&problem, &config.admm_config())?;
    let tsvd_rep = tsvd_baseline(&problem)?;

    let score = |method: &'static str, x: &DenseMatrix| -> Result<FsrMethodRow> {
        let rank_ok = numerical_rank(x, 1e-6)? <= k;
        Ok(FsrMethodRow {
            method,
            objective: frob_dist(x, &target)?,
            trace_ok: trace_specs.iter().all(|s| trace_satisfied(s, x, 1e-5)),
            psd_ok: membership(&ConstraintSpec::PsdCone, x, 1e-6)?,
            rank_ok,
            feasible: solution_feasible(x, &constraint, k)?,
        })
    };
    let rows = vec![
        score("admm", &report.x_final)?,
        score("tsvd", &tsvd_rep.x_final)?,
    ];

    let solution_csv = out.join("fsr_solution.csv");
    write_matrix_csv(&solution_csv, &report.x_final)?;

    let summary_csv = out.join("fsr_summary.csv");
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                fmt_float(r.objective),
                r.trace_ok.to_string(),
                r.psd_ok.to_string(),
                r.rank_ok.to_string(),
                r.feasible.to_string(),
            ]
        })
        .collect();
    write_csv_rows(
        &summary_csv,
        "method,frobenius_gap,trace_ok,psd_ok,rank_ok,feasible",
        &csv_rows,
    )?;

    let mut recovered_vector = None;
    let mut vector_csv = None;
    let mut psd_warning = false;
    if k == 1 && report.x_final.is_square() {
        if let Ok(recovery) = recover_rank1_vector(&report.x_final) {
            psd_warning = recovery.psd_warning;
            let path = out.join("fsr_vector.csv");
            let column = DenseMatrix::new(recovery.vector.len(), 1, recovery.vector.clone())?;
            write_matrix_csv(&path, &column)?;
            vector_csv = Some(path);
            recovered_vector = Some(recovery.vector);
        }
    }

    Ok(FsrOutcome {
        target,
        rank_bound: k,
        report,
        tsvd: tsvd_rep,
        rows,
        solution_csv,
        summary_csv,
        recovered_vector,
        vector_csv,
        psd_warning,
    })
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub feasible: bool,
    pub solution_csv: PathBuf,
    pub trace_csv: PathBuf,
    pub summary_csv: PathBuf,
}

/// Generic single solve: load (or generate) a target, apply the configured
/// constraint (non-negativity by default), and write the solution, the full
/// iteration trace, and a one-line summary.
pub fn run_solve(config: &ExperimentConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let out = ensure_output_dir(config)?;
    let target = match &config.input_path {
        Some(path) => read_matrix_csv(path)?,
        None => gen_nonneg_instance(config.rows, config.cols, config.seed)?,
    };
    let constraint = resolve_constraint(config, target.rows(), target.cols())?;
    let problem = RlraProblem::new(target, config.rank_bound, constraint)?;
    let report = admm_solve(&problem, &config.admm_config())?;
    let feasible = solution_feasible(&report.x_final, problem.constraint(), config.rank_bound)?;

    let solution_csv = out.join("solution.csv");
    write_matrix_csv(&solution_csv, &report.x_final)?;

    let trace_csv = out.join("trace.csv");
    let trace_rows: Vec<Vec<String>> = report
        .trace
        .iter()
        .map(|r| {
            vec![
                r.iter.to_string(),
                fmt_float(r.objective),
                fmt_float(r.primal_residual),
                fmt_float(r.dual_change),
                r.x_feasible.to_string(),
                r.y_feasible.to_string(),
                r.projection_converged.to_string(),
            ]
        })
        .collect();
    write_csv_rows(
        &trace_csv,
        "iter,objective,primal_residual,dual_change,x_feasible,y_feasible,projection_converged",
        &trace_rows,
    )?;

    let summary_csv = out.join("summary.csv");
    write_csv_rows(
        &summary_csv,
        "termination,iterations,objective,primal_residual,feasible",
        &[vec![
            termination_str(report.termination).to_string(),
            report.iterations().to_string(),
            fmt_float(report.final_objective()),
            fmt_float(report.final_primal_residual()),
            feasible.to_string(),
        ]],
    )?;

    Ok(SolveOutcome {
        report,
        feasible,
        solution_csv,
        trace_csv,
        summary_csv,
    })
}

/// Fixed points found for one blend weight.
#[derive(Clone, Debug)]
pub struct FixedPointsAlphaRow {
    pub alpha: f64,
    /// Qualifying subsets, 0-based into the descending singular values.
    pub subsets: Vec<Vec<usize>>,
    /// Constraint membership per subset (all true when unconstrained).
    pub feasible: Vec<bool>,
    /// Total number of K-subsets, for comparison.
    pub count_bound: u128,
}

#[derive(Clone, Debug)]
pub struct FixedPointsOutcome {
    pub csv_path: PathBuf,
    pub rows: Vec<FixedPointsAlphaRow>,
    pub base_matrix: DenseMatrix,
    pub rank_bound: usize,
}

/// Enumerate the fixed points of the rank-first iteration map for each blend
/// weight in `alpha_grid`, reporting which subsets of singular directions
/// qualify and whether each fixed point satisfies the configured constraint.
///
/// Without `input_path` this analyzes a small seeded 6x6 instance, keeping
/// the subset enumeration trivially cheap. Feasibility defaults to
/// unconstrained (always true) unless the config names a constraint.
pub fn run_fixed_points(config: &ExperimentConfig) -> Result<FixedPointsOutcome> {
    config.validate()?;
    let out = ensure_output_dir(config)?;
    let base = match &config.input_path {
        Some(path) => read_matrix_csv(path)?,
        None => gen_nonneg_instance(6, 6, config.seed)?,
    };
    let k = config.rank_bound;
    let constraint = match &config.constraint {
        Some(c) => c.resolve(base.rows(), base.cols())?,
        None => ConstraintSpec::Unconstrained,
    };
    let sigmas = svd(&base)?.sigma;

    let mut rows = Vec::with_capacity(config.alpha_grid.len());
    let mut csv_rows = Vec::new();
    for &alpha in &config.alpha_grid {
        let ctx = HMapContext::new(base.clone(), alpha, k)?;
        let set = enumerate_fixed_points(&ctx)?;
        let mut feasible = Vec::with_capacity(set.points.len());
        for point in &set.points {
            feasible.push(membership(&constraint, point, ARTIFACT_FEASIBILITY_TOL)?);
        }
        for (subset, ok) in set.index_subsets.iter().zip(feasible.iter()) {
            let subset_str = subset
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("|");
            let sigma_str = subset
                .iter()
                .map(|&i| fmt_float(sigmas[i]))
                .collect::<Vec<_>>()
                .join("|");
            csv_rows.push(vec![
                fmt_float(alpha),
                subset_str,
                sigma_str,
                ok.to_string(),
            ]);
        }
        rows.push(FixedPointsAlphaRow {
            alpha,
            subsets: set.index_subsets,
            feasible,
            count_bound: set.count_bound,
        });
    }
    let csv_path = out.join("fixed_points.csv");
    write_csv_rows(&csv_path, "alpha,subset,selected_sigmas,feasible", &csv_rows)?;
    Ok(FixedPointsOutcome {
        csv_path,
        rows,
        base_matrix: base,
        rank_bound: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(dir: &std::path::Path) -> ExperimentConfig {
        ExperimentConfig {
            rows: 8,
            cols: 6,
            rank_bound: 2,
            k_list: vec![2],
            rho_list: vec![5.0, 9.0],
            max_iters: 600,
            image_rows: 12,
            image_cols: 16,
            noise_sigma: 50.0,
            pin_fraction: 0.1,
            output_dir: dir.to_path_buf(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn solve_runner_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let outcome = run_solve(&config).unwrap();
        assert_eq!(outcome.report.termination, Termination::Converged);
        assert!(outcome.feasible);
        for path in [
            &outcome.solution_csv,
            &outcome.trace_csv,
            &outcome.summary_csv,
        ] {
            assert!(path.exists(), "missing {}", path.display());
        }
        let solution = read_matrix_csv(&outcome.solution_csv).unwrap();
        assert_eq!(solution.shape(), (8, 6));
    }

    #[test]
    fn nonneg_runner_produces_comparable_traces() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let outcome = run_nonneg_experiment(&config).unwrap();
        assert_eq!(outcome.results.len(), 1);
        let result = &outcome.results[0];
        assert!(result.admm_feasible);
        assert!(result.nmf.feasible);
        let text = std::fs::read_to_string(&result.trace_csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,admm_obj,adp_obj,nmf_obj"));
        let expected = result
            .admm
            .iterations()
            .max(result.adp.trace.len())
            .max(result.nmf.trace.len());
        assert_eq!(lines.count(), expected);
    }

    #[test]
    fn rho_sweep_runner_records_every_penalty() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let outcome = run_rho_sweep(&config).unwrap();
        assert_eq!(outcome.rows.len(), 2);
        for row in &outcome.rows {
            assert!(row.iterations_to_threshold.is_some());
        }
        let text = std::fs::read_to_string(&outcome.sweep_csv).unwrap();
        assert!(text.starts_with("iter,rho,residual,objective\n"));
    }

    #[test]
    fn denoise_runner_pins_exactly_and_exports_images() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let outcome = run_denoise(&config).unwrap();
        assert_eq!(outcome.pin_count, (0.1f64 * 12.0 * 16.0).ceil() as usize);
        assert!(outcome.pins_exact);
        assert_eq!(outcome.rows.len(), 3);
        assert_eq!(outcome.rows[0].label, "noisy");
        assert!(!outcome.rows[0].feasible);
        for path in [
            &outcome.clean_pgm,
            &outcome.noisy_pgm,
            &outcome.tsvd_pgm,
            &outcome.rlra_pgm,
            &outcome.metrics_csv,
        ] {
            assert!(path.exists(), "missing {}", path.display());
        }
        let clean = read_pgm(&outcome.clean_pgm).unwrap();
        assert_eq!(clean.shape(), (12, 16));
    }

    #[test]
    fn fsr_runner_default_instance_restores_the_trace() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path());
        config.max_iters = 2000;
        let outcome = run_fsr_sdpr(&config).unwrap();
        assert_eq!(outcome.rank_bound, 1);
        let admm = &outcome.rows[0];
        let tsvd = &outcome.rows[1];
        assert_eq!(admm.method, "admm");
        assert!(admm.trace_ok && admm.psd_ok && admm.rank_ok && admm.feasible);
        assert_eq!(tsvd.method, "tsvd");
        assert!(!tsvd.trace_ok);
        assert!(!tsvd.feasible);
        let v = outcome.recovered_vector.as_ref().expect("vector expected");
        assert_eq!(v.len(), 2);
        // The nearest rank-1 PSD matrix with trace 2 is all ones, so the
        // factor is (1, 1).
        for entry in v {
            assert!((entry - 1.0).abs() < 1e-3, "entry {entry}");
        }
    }

    #[test]
    fn fsr_runner_rejects_custom_input_without_trace_constraints() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("target.csv");
        std::fs::write(&input, "1,0\n0,1\n").unwrap();
        let mut config = tiny_config(dir.path());
        config.input_path = Some(input);
        assert!(run_fsr_sdpr(&config).is_err());
    }

    #[test]
    fn fixed_points_runner_counts_grow_with_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let outcome = run_fixed_points(&config).unwrap();
        assert_eq!(outcome.rows.len(), 3);
        let counts: Vec<usize> = outcome.rows.iter().map(|r| r.subsets.len()).collect();
        assert!(counts[0] >= 1, "tsvd subset always qualifies");
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "counts {counts:?}");
        assert!(outcome.csv_path.exists());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let config_a = tiny_config(dir_a.path());
        let config_b = tiny_config(dir_b.path());
        let out_a = run_nonneg_experiment(&config_a).unwrap();
        let out_b = run_nonneg_experiment(&config_b).unwrap();
        let bytes_a = std::fs::read(&out_a.results[0].trace_csv).unwrap();
        let bytes_b = std::fs::read(&out_b.results[0].trace_csv).unwrap();
        assert_eq!(bytes_a, bytes_b);
    }
}
