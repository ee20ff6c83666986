//! Convex constraint sets and their exact Euclidean projections.

use crate::error::{Error, Result};
use crate::matrix::{frob_dist, symmetric_eigen, DenseMatrix};

/// Successive-sweep change below which Dykstra's algorithm stops.
pub const DYKSTRA_TOL: f64 = 1e-12;
/// Hard cap on Dykstra sweeps; hitting it marks the result as not converged.
pub const DYKSTRA_MAX_SWEEPS: usize = 5000;

/// A scalar bound applied to every entry, or one bound per entry.
#[derive(Clone, Debug, PartialEq)]
pub enum Bounds {
    Scalar(f64),
    PerEntry(DenseMatrix),
}

impl Bounds {
    fn value_at(&self, i: usize, j: usize) -> f64 {
        match self {
            Bounds::Scalar(v) => *v,
            Bounds::PerEntry(m) => m[(i, j)],
        }
    }

    fn validate(&self, rows: usize, cols: usize, label: &str) -> Result<()> {
        match self {
            Bounds::Scalar(v) => {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("{label} bound must be finite")));
                }
            }
            Bounds::PerEntry(m) => {
                if m.shape() != (rows, cols) {
                    return Err(Error::ShapeMismatch {
                        expected_rows: rows,
                        expected_cols: cols,
                        rows: m.rows(),
                        cols: m.cols(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A closed convex set of m x n matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintSpec {
    /// Entrywise `X >= 0`.
    NonNegative,
    /// Entrywise `lo <= X <= hi`.
    Box { lo: Bounds, hi: Bounds },
    /// Entries under the mask are pinned to the given values.
    FixedEntries {
        /// Row-major mask; `true` marks a pinned entry.
        mask: Vec<bool>,
        /// Pin values; only entries under the mask are read.
        values: DenseMatrix,
    },
    /// Constant anti-diagonals.
    Hankel,
    /// Constant diagonals.
    Toeplitz,
    /// Symmetric positive semidefinite matrices.
    PsdCone,
    /// `{X : <A, X> = b}` for a nonzero coefficient matrix `A`.
    TraceHyperplane { a: DenseMatrix, b: f64 },
    /// `{X : <A, X> >= b}`.
    TraceHalfSpace { a: DenseMatrix, b: f64 },
    /// All member sets at once; projected with Dykstra's algorithm.
    Intersection(Vec<ConstraintSpec>),
    /// The whole space.
    Unconstrained,
}

impl ConstraintSpec {
    /// Box with the same scalar bounds on every entry.
    pub fn box_scalar(lo: f64, hi: f64) -> ConstraintSpec {
        ConstraintSpec::Box {
            lo: Bounds::Scalar(lo),
            hi: Bounds::Scalar(hi),
        }
    }

    /// Pins the masked entries of an m x n matrix to `values`.
    pub fn fixed_entries(mask: Vec<bool>, values: DenseMatrix) -> Result<ConstraintSpec> {
        if mask.len() != values.rows() * values.cols() {
            return Err(Error::invalid(format!(
                "mask has {} entries but values is {}x{}",
                mask.len(),
                values.rows(),
                values.cols()
            )));
        }
        Ok(ConstraintSpec::FixedEntries { mask, values })
    }

    /// Checks that the set is well formed and applies to m x n matrices.
    pub fn validate_for(&self, rows: usize, cols: usize) -> Result<()> {
        match self {
            ConstraintSpec::NonNegative
            | ConstraintSpec::Hankel
            | ConstraintSpec::Toeplitz
            | ConstraintSpec::Unconstrained => Ok(()),
            ConstraintSpec::Box { lo, hi } => {
                lo.validate(rows, cols, "lower")?;
                hi.validate(rows, cols, "upper")?;
                for i in 0..rows {
                    for j in 0..cols {
                        if lo.value_at(i, j) > hi.value_at(i, j) {
                            return Err(Error::invalid(format!(
                                "box bounds cross at ({i}, {j})"
                            )));
                        }
                    }
                }
                Ok(())
            }
            ConstraintSpec::FixedEntries { mask, values } => {
                if values.shape() != (rows, cols) || mask.len() != rows * cols {
                    return Err(Error::ShapeMismatch {
                        expected_rows: rows,
                        expected_cols: cols,
                        rows: values.rows(),
                        cols: values.cols(),
                    });
                }
                Ok(())
            }
            ConstraintSpec::PsdCone => {
                if rows != cols {
                    return Err(Error::invalid(
                        "the PSD cone only applies to square matrices",
                    ));
                }
                Ok(())
            }
            ConstraintSpec::TraceHyperplane { a, b } | ConstraintSpec::TraceHalfSpace { a, b } => {
                if a.shape() != (rows, cols) {
                    return Err(Error::ShapeMismatch {
                        expected_rows: rows,
                        expected_cols: cols,
                        rows: a.rows(),
                        cols: a.cols(),
                    });
                }
                if a.frob_norm() == 0.0 {
                    return Err(Error::invalid("trace constraint needs a nonzero A"));
                }
                if !b.is_finite() {
                    return Err(Error::invalid("trace constraint level must be finite"));
                }
                Ok(())
            }
            ConstraintSpec::Intersection(sets) => {
                if sets.is_empty() {
                    return Err(Error::invalid("intersection needs at least one member"));
                }
                for set in sets {
                    set.validate_for(rows, cols)?;
                }
                Ok(())
            }
        }
    }
}

/// Outcome of a projection. Primitive sets always converge in one shot;
/// `converged = false` can only come from a capped Dykstra loop.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub point: DenseMatrix,
    pub converged: bool,
    /// Dykstra sweeps used; zero for primitive sets.
    pub inner_iterations: usize,
}

fn exact(point: DenseMatrix) -> ProjectionResult {
    ProjectionResult {
        point,
        converged: true,
        inner_iterations: 0,
    }
}

fn project_hankel(m: &DenseMatrix) -> DenseMatrix {
    let (rows, cols) = m.shape();
    let mut out = m.clone();
    for s in 0..(rows + cols - 1) {
        let i_lo = s.saturating_sub(cols - 1);
        let i_hi = s.min(rows - 1);
        let count = (i_hi - i_lo + 1) as f64;
        let mut sum = 0.0;
        for i in i_lo..=i_hi {
            sum += m[(i, s - i)];
        }
        let mean = sum / count;
        for i in i_lo..=i_hi {
            out[(i, s - i)] = mean;
        }
    }
    out
}

fn project_toeplitz(m: &DenseMatrix) -> DenseMatrix {
    let (rows, cols) = m.shape();
    let mut out = m.clone();
    for d in -(rows as isize - 1)..(cols as isize) {
        let i_lo = (-d).max(0) as usize;
        let i_hi = ((cols as isize - 1 - d) as usize).min(rows - 1);
        let count = (i_hi - i_lo + 1) as f64;
        let mut sum = 0.0;
        for i in i_lo..=i_hi {
            sum += m[(i, (i as isize + d) as usize)];
        }
        let mean = sum / count;
        for i in i_lo..=i_hi {
            out[(i, (i as isize + d) as usize)] = mean;
        }
    }
    out
}

fn symmetrize(m: &DenseMatrix) -> DenseMatrix {
    m.zip_map(&m.transpose(), |a, b| 0.5 * (a + b))
}

fn project_psd(m: &DenseMatrix) -> Result<DenseMatrix> {
    let (values, vectors) = symmetric_eigen(&symmetrize(m))?;
    let n = m.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for (t, lambda) in values.iter().enumerate() {
        if *lambda <= 0.0 {
            continue;
        }
        for i in 0..n {
            let scaled = lambda * vectors[(i, t)];
            for j in 0..n {
                out[(i, j)] += scaled * vectors[(j, t)];
            }
        }
    }
    Ok(out)
}

fn min_eigenvalue(m: &DenseMatrix) -> Result<f64> {
    let (values, _) = symmetric_eigen(&symmetrize(m))?;
    // Sorted descending, so the minimum sits at the end.
    Ok(values.last().copied().unwrap_or(f64::INFINITY))
}

fn project_trace_hyperplane(m: &DenseMatrix, a: &DenseMatrix, b: f64) -> DenseMatrix {
    let gap = (a.inner(m) - b) / a.inner(a);
    m.zip_map(a, |x, coeff| x - gap * coeff)
}

fn project_dykstra(sets: &[ConstraintSpec], m: &DenseMatrix) -> Result<ProjectionResult> {
    let mut x = m.clone();
    let mut increments = vec![DenseMatrix::zeros(m.rows(), m.cols()); sets.len()];
    let mut converged = false;
    let mut sweeps = 0;
    for sweep in 1..=DYKSTRA_MAX_SWEEPS {
        let before = x.clone();
        for (set, increment) in sets.iter().zip(increments.iter_mut()) {
            let shifted = x.add(increment);
            let projected = project(set, &shifted)?;
            *increment = shifted.sub(&projected.point);
            x = projected.point;
        }
        sweeps = sweep;
        if x.sub(&before).frob_norm() <= DYKSTRA_TOL {
            converged = true;
            break;
        }
    }
    Ok(ProjectionResult {
        point: x,
        converged,
        inner_iterations: sweeps,
    })
}

/// Euclidean projection of `m` onto the set.
///
/// Primitive sets use their closed-form projections; intersections run
/// Dykstra's algorithm and report whether it converged.
pub fn project(set: &ConstraintSpec, m: &DenseMatrix) -> Result<ProjectionResult> {
    set.validate_for(m.rows(), m.cols())?;
    match set {
        ConstraintSpec::NonNegative => Ok(exact(m.map(|v| v.max(0.0)))),
        ConstraintSpec::Box { lo, hi } => Ok(exact(DenseMatrix::from_fn(
            m.rows(),
            m.cols(),
            |i, j| m[(i, j)].clamp(lo.value_at(i, j), hi.value_at(i, j)),
        ))),
        ConstraintSpec::FixedEntries { mask, values } => {
            let cols = m.cols();
            let mut out = m.clone();
            for (idx, pinned) in mask.iter().enumerate() {
                if *pinned {
                    out[(idx / cols, idx % cols)] = values[(idx / cols, idx % cols)];
                }
            }
            Ok(exact(out))
        }
        ConstraintSpec::Hankel => Ok(exact(project_hankel(m))),
        ConstraintSpec::Toeplitz => Ok(exact(project_toeplitz(m))),
        ConstraintSpec::PsdCone => Ok(exact(project_psd(m)?)),
        ConstraintSpec::TraceHyperplane { a, b } => {
            Ok(exact(project_trace_hyperplane(m, a, *b)))
        }
        ConstraintSpec::TraceHalfSpace { a, b } => {
            if a.inner(m) >= *b {
                Ok(exact(m.clone()))
            } else {
                Ok(exact(project_trace_hyperplane(m, a, *b)))
            }
        }
        ConstraintSpec::Intersection(sets) => project_dykstra(sets, m),
        ConstraintSpec::Unconstrained => Ok(exact(m.clone())),
    }
}

/// Whether `m` violates any defining condition of the set by more than `tol`.
///
/// Structure sets (Hankel, Toeplitz) compare against their own projection;
/// the PSD cone checks symmetry and the minimum eigenvalue.
pub fn membership(set: &ConstraintSpec, m: &DenseMatrix, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::invalid("membership tolerance must be non-negative"));
    }
    set.validate_for(m.rows(), m.cols())?;
    Ok(match set {
        ConstraintSpec::NonNegative => m.data().iter().all(|v| *v >= -tol),
        ConstraintSpec::Box { lo, hi } => {
            let mut ok = true;
            'scan: for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let v = m[(i, j)];
                    if v < lo.value_at(i, j) - tol || v > hi.value_at(i, j) + tol {
                        ok = false;
                        break 'scan;
                    }
                }
            }
            ok
        }
        ConstraintSpec::FixedEntries { mask, values } => {
            let cols = m.cols();
            mask.iter().enumerate().all(|(idx, pinned)| {
                !*pinned || (m[(idx / cols, idx % cols)] - values[(idx / cols, idx % cols)]).abs() <= tol
            })
        }
        ConstraintSpec::Hankel => frob_dist(m, &project_hankel(m))? <= tol,
        ConstraintSpec::Toeplitz => frob_dist(m, &project_toeplitz(m))? <= tol,
        ConstraintSpec::PsdCone => {
            m.sub(&m.transpose()).max_abs() <= tol && min_eigenvalue(m)? >= -tol
        }
        ConstraintSpec::TraceHyperplane { a, b } => (a.inner(m) - b).abs() <= tol,
        ConstraintSpec::TraceHalfSpace { a, b } => a.inner(m) >= b - tol,
        ConstraintSpec::Intersection(sets) => {
            for set in sets {
                if !membership(set, m, tol)? {
                    return Ok(false);
                }
            }
            true
        }
        ConstraintSpec::Unconstrained => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
        DenseMatrix::new(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn nonnegative_projection_clamps() {
        let m = mat(2, 2, &[-1.0, 2.0, 3.0, -4.0]);
        let p = project(&ConstraintSpec::NonNegative, &m).unwrap();
        assert!(p.converged);
        assert_eq!(p.point.data(), &[0.0, 2.0, 3.0, 0.0]);
    }

    #[test]
    fn box_projection_clamps_and_degenerate_box_pins() {
        let m = mat(1, 3, &[-2.0, 0.4, 7.0]);
        let p = project(&ConstraintSpec::box_scalar(0.0, 1.0), &m).unwrap();
        assert_eq!(p.point.data(), &[0.0, 0.4, 1.0]);

        let pinned = project(&ConstraintSpec::box_scalar(0.5, 0.5), &m).unwrap();
        assert_eq!(pinned.point.data(), &[0.5, 0.5, 0.5]);

        assert!(matches!(
            project(&ConstraintSpec::box_scalar(1.0, 0.0), &m),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn per_entry_box_bounds_apply_entrywise() {
        let m = mat(1, 2, &[5.0, -5.0]);
        let set = ConstraintSpec::Box {
            lo: Bounds::PerEntry(mat(1, 2, &[0.0, -1.0])),
            hi: Bounds::PerEntry(mat(1, 2, &[1.0, 4.0])),
        };
        let p = project(&set, &m).unwrap();
        assert_eq!(p.point.data(), &[1.0, -1.0]);
        assert!(membership(&set, &p.point, 1e-12).unwrap());
    }

    #[test]
    fn fixed_entries_projection_overwrites_pins_only() {
        let values = mat(2, 2, &[9.0, 0.0, 0.0, 7.0]);
        let set = ConstraintSpec::fixed_entries(vec![true, false, false, true], values).unwrap();
        let m = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let p = project(&set, &m).unwrap();
        assert_eq!(p.point.data(), &[9.0, 2.0, 3.0, 7.0]);

        let empty = ConstraintSpec::fixed_entries(vec![false; 4], mat(2, 2, &[0.0; 4])).unwrap();
        assert_eq!(project(&empty, &m).unwrap().point, m);
    }

    #[test]
    fn hankel_projection_averages_antidiagonals() {
        let m = mat(2, 2, &[1.0, 3.0, 2.0, 4.0]);
        let p = project(&ConstraintSpec::Hankel, &m).unwrap();
        assert_eq!(p.point.data(), &[1.0, 2.5, 2.5, 4.0]);
        assert!(membership(&ConstraintSpec::Hankel, &p.point, 1e-12).unwrap());
    }

    #[test]
    fn toeplitz_projection_averages_diagonals() {
        let m = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let p = project(&ConstraintSpec::Toeplitz, &m).unwrap();
        assert_eq!(p.point.data(), &[2.5, 2.0, 3.0, 2.5]);

        let already = mat(2, 3, &[1.0, 2.0, 5.0, 3.0, 1.0, 2.0]);
        assert_eq!(project(&ConstraintSpec::Toeplitz, &already).unwrap().point, already);
    }

    #[test]
    fn psd_projection_clips_negative_eigenvalues() {
        let m = mat(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = project(&ConstraintSpec::PsdCone, &m).unwrap();
        for (got, want) in p.point.data().iter().zip([0.5, 0.5, 0.5, 0.5]) {
            assert!((got - want).abs() <= 1e-12);
        }
        assert!(membership(&ConstraintSpec::PsdCone, &p.point, 1e-9).unwrap());
        assert!(matches!(
            project(&ConstraintSpec::PsdCone, &mat(1, 2, &[1.0, 2.0])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn psd_membership_checks_minimum_eigenvalue() {
        let slightly_indefinite = mat(2, 2, &[1.0, 0.0, 0.0, -1e-6]);
        assert!(!membership(&ConstraintSpec::PsdCone, &slightly_indefinite, 1e-9).unwrap());
        assert!(membership(&ConstraintSpec::PsdCone, &slightly_indefinite, 1e-3).unwrap());
    }

    #[test]
    fn trace_hyperplane_projection_hits_the_plane() {
        let set = ConstraintSpec::TraceHyperplane {
            a: DenseMatrix::identity(2),
            b: 1.0,
        };
        let m = mat(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let p = project(&set, &m).unwrap();
        for (got, want) in p.point.data().iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((got - want).abs() <= 1e-12);
        }
        assert!(membership(&set, &p.point, 1e-9).unwrap());

        let zero_a = ConstraintSpec::TraceHyperplane {
            a: DenseMatrix::zeros(2, 2),
            b: 1.0,
        };
        assert!(project(&zero_a, &m).is_err());
    }

    #[test]
    fn trace_half_space_projects_only_when_violated() {
        let set = ConstraintSpec::TraceHalfSpace {
            a: DenseMatrix::identity(2),
            b: 1.0,
        };
        let feasible = mat(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert_eq!(project(&set, &feasible).unwrap().point, feasible);

        let violating = mat(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let p = project(&set, &violating).unwrap();
        assert!((p.point.data()[0] - 0.5).abs() <= 1e-12);
        assert!((p.point.data()[3] - 0.5).abs() <= 1e-12);
        assert!(membership(&set, &p.point, 1e-9).unwrap());
    }

    #[test]
    fn intersection_projection_satisfies_all_members() {
        let set = ConstraintSpec::Intersection(vec![
            ConstraintSpec::NonNegative,
            ConstraintSpec::TraceHyperplane {
                a: DenseMatrix::identity(2),
                b: 1.0,
            },
        ]);
        let m = mat(2, 2, &[-1.0, 0.3, -0.2, 2.5]);
        let p = project(&set, &m).unwrap();
        assert!(p.converged);
        assert!(p.inner_iterations >= 1);
        assert!(membership(&set, &p.point, 1e-8).unwrap());

        assert!(matches!(
            project(&ConstraintSpec::Intersection(vec![]), &m),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unconstrained_projection_is_identity() {
        let m = mat(2, 2, &[1.0, -2.0, 3.0, -4.0]);
        let p = project(&ConstraintSpec::Unconstrained, &m).unwrap();
        assert_eq!(p.point, m);
        assert!(membership(&ConstraintSpec::Unconstrained, &m, 0.0).unwrap());
    }

    #[test]
    fn membership_rejects_negative_tolerance() {
        let m = mat(1, 1, &[1.0]);
        assert!(membership(&ConstraintSpec::NonNegative, &m, -1e-9).is_err());
    }

    #[test]
    fn shape_validation_catches_mismatched_constraint_data() {
        let values = mat(2, 2, &[0.0; 4]);
        let set = ConstraintSpec::fixed_entries(vec![true; 4], values).unwrap();
        let wrong = mat(3, 2, &[0.0; 6]);
        assert!(matches!(
            project(&set, &wrong),
            Err(Error::ShapeMismatch { .. })
        ));

        let trace = ConstraintSpec::TraceHyperplane {
            a: DenseMatrix::identity(2),
            b: 1.0,
        };
        assert!(project(&trace, &wrong).is_err());
    }
}
