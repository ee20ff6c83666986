//! Dense matrix storage and the SVD-based primitives the solver is built on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64` entries.
///
/// Constructors reject NaN and infinite values, so code downstream can rely on
/// finite arithmetic without re-checking.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries. Fails if the dimensions are
    /// zero, the entry count is wrong, or any entry is non-finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "a {rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        for (idx, value) in data.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix::new(rows, cols, vec![0.0; rows * cols])
            .expect("zero matrix construction cannot fail for positive dimensions")
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        DenseMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    /// Builds a matrix entry by entry. Panics if `f` produces a non-finite
    /// value; use [`DenseMatrix::new`] when the input is untrusted.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix::new(rows, cols, data).expect("from_fn produced an invalid matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &DenseMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub(crate) fn require_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected_rows: self.rows,
                expected_cols: self.cols,
                rows: other.rows,
                cols: other.cols,
            })
        }
    }

    /// Entrywise combination with another matrix of the same shape.
    /// Panics on shape mismatch; the public solver entry points validate
    /// shapes before arithmetic starts.
    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &DenseMatrix, f: F) -> DenseMatrix {
        assert!(
            self.same_shape(other),
            "zip_map on mismatched shapes {:?} vs {:?}",
            self.shape(),
            other.shape()
        );
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> DenseMatrix {
        self.map(|v| factor * v)
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Plain matrix product. Panics if the inner dimensions disagree.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul on incompatible shapes {:?} vs {:?}",
            self.shape(),
            other.shape()
        );
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.data[i * self.cols + t];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[t * other.cols..(t + 1) * other.cols];
                let out = &mut data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out.iter_mut().zip(row.iter()) {
                    *o += a * b;
                }
            }
        }
        DenseMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Trace inner product `sum_ij A_ij * B_ij`. Panics on shape mismatch.
    pub fn inner(&self, other: &DenseMatrix) -> f64 {
        assert!(
            self.same_shape(other),
            "inner product on mismatched shapes {:?} vs {:?}",
            self.shape(),
            other.shape()
        );
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Frobenius distance between two matrices of the same shape.
pub fn frob_dist(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    a.require_same_shape(b)?;
    Ok(a.sub(b).frob_norm())
}

/// Thin singular value decomposition `M = U * diag(sigma) * V^T`.
///
/// `u` is m x r and `v` is n x r with r = min(m, n); `sigma` is sorted in
/// descending order. Ties keep the order produced by the backend, which is
/// deterministic for a fixed input.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdTriple {
    /// Sum of `sigma[i] * u_i * v_i^T` over the given column indices.
    pub fn reconstruct_subset(&self, indices: &[usize]) -> DenseMatrix {
        let rows = self.u.rows();
        let cols = self.v.rows();
        let mut data = vec![0.0; rows * cols];
        for &t in indices {
            let s = self.sigma[t];
            for i in 0..rows {
                let scaled = s * self.u[(i, t)];
                if scaled == 0.0 {
                    continue;
                }
                for j in 0..cols {
                    data[i * cols + j] += scaled * self.v[(j, t)];
                }
            }
        }
        DenseMatrix {
            rows,
            cols,
            data,
        }
    }

    /// Reconstruction from the leading `k` triples (all of them if `k`
    /// exceeds the rank).
    pub fn truncate(&self, k: usize) -> DenseMatrix {
        let keep = k.min(self.sigma.len());
        let indices: Vec<usize> = (0..keep).collect();
        self.reconstruct_subset(&indices)
    }
}

/// Relative tolerance for accepting a factorization's reconstruction of its
/// input. Backward-stable results sit orders of magnitude below this; the
/// backend misfires this guards against sit orders of magnitude above.
const FACTOR_CHECK_TOL: f64 = 1e-10;

/// Sweep cap for the Jacobi fallbacks. Cyclic Jacobi converges in well under
/// twenty sweeps on anything well scaled; hitting the cap is reported as a
/// numerical failure rather than returning unverified factors.
const JACOBI_SWEEP_CAP: usize = 60;

/// Frobenius distance between `left * diag(scale) * right^T` and `m`.
fn factor_residual(
    left: &DenseMatrix,
    scale: &[f64],
    right: &DenseMatrix,
    m: &DenseMatrix,
) -> Result<f64> {
    let mut scaled = left.clone();
    for (j, s) in scale.iter().enumerate() {
        for i in 0..scaled.rows() {
            scaled[(i, j)] *= s;
        }
    }
    frob_dist(&scaled.matmul(&right.transpose()), m)
}

/// Stable sort of a decomposition's columns by descending singular value;
/// ties keep the incoming order so the truncation tie-break stays
/// deterministic.
fn sort_triple(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix) -> SvdTriple {
    let r = sigma.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).expect("finite sigma"));
    let sorted_sigma: Vec<f64> = order.iter().map(|&t| sigma[t]).collect();
    let sorted_u = DenseMatrix::from_fn(u.rows(), r, |i, t| u[(i, order[t])]);
    let sorted_v = DenseMatrix::from_fn(v.rows(), r, |j, t| v[(j, order[t])]);
    SvdTriple {
        u: sorted_u,
        sigma: sorted_sigma,
        v: sorted_v,
    }
}

/// Raw decomposition from the bidiagonal backend: sorted but unverified.
fn backend_svd(m: &DenseMatrix) -> Result<SvdTriple> {
    let decomposition = m.to_nalgebra().svd(true, true);
    let u = decomposition
        .u
        .ok_or_else(|| Error::invalid("svd backend did not return U"))?;
    let v_t = decomposition
        .v_t
        .ok_or_else(|| Error::invalid("svd backend did not return V^T"))?;
    let sigma: Vec<f64> = decomposition.singular_values.iter().copied().collect();
    let r = sigma.len();
    let u_dense = DenseMatrix::from_fn(u.nrows(), r, |i, t| u[(i, t)]);
    let v_dense = DenseMatrix::from_fn(v_t.ncols(), r, |j, t| v_t[(t, j)]);
    Ok(sort_triple(u_dense, sigma, v_dense))
}

/// One-sided Jacobi SVD: rotates column pairs until they are mutually
/// orthogonal. Several times slower than the bidiagonal backend but accurate
/// on exactly rank-deficient inputs, which is the case that backend gets
/// wrong; only runs when verification of the fast path fails.
fn jacobi_svd(m: &DenseMatrix) -> Result<SvdTriple> {
    if m.rows() < m.cols() {
        let t = jacobi_svd(&m.transpose())?;
        return Ok(SvdTriple {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let rows = m.rows();
    let n = m.cols();
    let mut w = m.clone();
    let mut v = DenseMatrix::identity(n);
    let mut converged = false;
    for _ in 0..JACOBI_SWEEP_CAP {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if apq == 0.0 || apq.abs() <= f64::EPSILON * (app * aqq).sqrt() {
                    continue;
                }
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + 1.0f64.hypot(zeta));
                let c = 1.0 / 1.0f64.hypot(t);
                let s = c * t;
                if s == 0.0 {
                    continue;
                }
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("jacobi svd exceeded its sweep cap"));
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..rows).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut u = DenseMatrix::zeros(rows, n);
    for j in 0..n {
        if norms[j] > 0.0 {
            for i in 0..rows {
                u[(i, j)] = w[(i, j)] / norms[j];
            }
        }
    }
    let mut triple = sort_triple(u, norms, v);
    fill_null_columns(&mut triple);
    Ok(triple)
}

/// Replaces U columns belonging to exactly zero singular values with an
/// orthonormal completion so the triple keeps orthonormal columns.
fn fill_null_columns(triple: &mut SvdTriple) {
    let rows = triple.u.rows();
    for t in 0..triple.sigma.len() {
        if triple.sigma[t] > 0.0 {
            continue;
        }
        // Basis vector least represented by the columns placed so far; its
        // residual keeps a norm of at least sqrt((rows - t) / rows).
        let mut best = vec![0.0; rows];
        let mut best_norm = -1.0;
        for e in 0..rows {
            let mut candidate = vec![0.0; rows];
            candidate[e] = 1.0;
            for s in 0..t {
                let dot: f64 = (0..rows).map(|i| triple.u[(i, s)] * candidate[i]).sum();
                for i in 0..rows {
                    candidate[i] -= dot * triple.u[(i, s)];
                }
            }
            let norm = candidate.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = candidate;
            }
        }
        for i in 0..rows {
            triple.u[(i, t)] = best[i] / best_norm;
        }
    }
}

/// Computes the thin SVD with singular values sorted in descending order.
///
/// Every result is verified by multiplying the factors back together: the
/// bidiagonal backend can pair orthonormal factors with wrong values on
/// exactly rank-deficient inputs. A failed check reruns the decomposition
/// with one-sided Jacobi rotations before anything is returned.
pub fn svd(m: &DenseMatrix) -> Result<SvdTriple> {
    let tol = FACTOR_CHECK_TOL * (1.0 + m.frob_norm());
    let fast = backend_svd(m)?;
    if factor_residual(&fast.u, &fast.sigma, &fast.v, m)? <= tol {
        return Ok(fast);
    }
    let slow = jacobi_svd(m)?;
    if factor_residual(&slow.u, &slow.sigma, &slow.v, m)? <= tol {
        return Ok(slow);
    }
    Err(Error::numerical("svd factors failed to reproduce the input"))
}

/// Eigendecomposition of a symmetric matrix: eigenvalues sorted in
/// descending order with the matching orthonormal eigenvector columns.
///
/// Verified the same way as `svd`, with cyclic Jacobi rotations as the
/// fallback when the backend factors fail to reproduce the input.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !m.is_square() {
        return Err(Error::invalid("eigendecomposition needs a square matrix"));
    }
    let tol = FACTOR_CHECK_TOL * (1.0 + m.frob_norm());
    let backend = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    let values: Vec<f64> = backend.eigenvalues.iter().copied().collect();
    let vectors = DenseMatrix::from_fn(m.rows(), m.rows(), |i, t| backend.eigenvectors[(i, t)]);
    let (values, vectors) = sort_eigen(values, vectors);
    if factor_residual(&vectors, &values, &vectors, m)? <= tol {
        return Ok((values, vectors));
    }
    let (values, vectors) = jacobi_eigen(m)?;
    if factor_residual(&vectors, &values, &vectors, m)? <= tol {
        return Ok((values, vectors));
    }
    Err(Error::numerical(
        "eigendecomposition failed to reproduce the input",
    ))
}

/// Stable sort of an eigendecomposition by descending eigenvalue.
fn sort_eigen(values: Vec<f64>, vectors: DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite eigenvalue"));
    let sorted_values: Vec<f64> = order.iter().map(|&t| values[t]).collect();
    let sorted_vectors = DenseMatrix::from_fn(vectors.rows(), n, |i, t| vectors[(i, order[t])]);
    (sorted_values, sorted_vectors)
}

/// Cyclic two-sided Jacobi eigendecomposition for symmetric input.
fn jacobi_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = m.rows();
    let mut a = m.clone();
    let mut vectors = DenseMatrix::identity(n);
    let mut converged = false;
    for _ in 0..JACOBI_SWEEP_CAP {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0
                    || apq.abs() <= f64::EPSILON * (a[(p, p)].abs() * a[(q, q)].abs()).sqrt()
                {
                    continue;
                }
                let zeta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + 1.0f64.hypot(zeta));
                let c = 1.0 / 1.0f64.hypot(t);
                let s = c * t;
                if s == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(p, i)] = a[(i, p)];
                    a[(i, q)] = s * aip + c * aiq;
                    a[(q, i)] = a[(i, q)];
                }
                for i in 0..n {
                    let vip = vectors[(i, p)];
                    let viq = vectors[(i, q)];
                    vectors[(i, p)] = c * vip - s * viq;
                    vectors[(i, q)] = s * vip + c * viq;
                }
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("jacobi eigen exceeded its sweep cap"));
    }
    let values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    Ok(sort_eigen(values, vectors))
}

/// Best rank-`k` approximation of `m` in Frobenius norm.
///
/// Keeps the first `k` singular triples in SVD order; when singular values
/// tie, that order decides the result deterministically.
pub fn truncated_svd(m: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(Error::invalid("rank bound must be at least 1"));
    }
    Ok(svd(m)?.truncate(k))
}

/// Number of singular values exceeding `tol` times the largest one.
pub fn numerical_rank(m: &DenseMatrix, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::invalid("rank tolerance must be positive"));
    }
    // The verified decomposition costs more than a values-only pass but
    // shields rank decisions from the same backend misfires as `svd`.
    let sigma = svd(m)?.sigma;
    let top = sigma.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(sigma.iter().filter(|s| **s > tol * top).count())
}
