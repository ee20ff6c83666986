//! Fixed points of the rank-truncation iteration map.
//!
//! Once the dual variable settles, each sweep acts on `X` like
//! `H(X) = truncate(alpha * X + (1 - alpha) * D, K)` with `alpha = rho / (2 + rho)`
//! and a constant matrix `D`. The fixed points of `H` are exactly the sums of
//! `K` singular triples of `D` whose values dominate the discarded ones by a
//! factor `1 - alpha`, which makes them enumerable.

use crate::constraints::{membership, ConstraintSpec};
use crate::error::{Error, Result};
use crate::matrix::{frob_dist, svd, DenseMatrix};

/// Exhaustive enumeration is refused above this many subsets.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Singular value gap below which the truncation inside `H` is flagged as
/// having no unique minimizer.
pub const TIE_TOL: f64 = 1e-10;

/// The frozen data of the iteration map `H`.
#[derive(Clone, Debug)]
pub struct HMapContext {
    d: DenseMatrix,
    alpha: f64,
    k: usize,
}

impl HMapContext {
    pub fn new(d: DenseMatrix, alpha: f64, k: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha must lie strictly between 0 and 1"));
        }
        let max_rank = d.rows().min(d.cols());
        if k == 0 || k > max_rank {
            return Err(Error::invalid(format!(
                "rank bound must lie in 1..={max_rank}, got {k}"
            )));
        }
        Ok(HMapContext { d, alpha, k })
    }

    /// Builds the map a solver run settles into: `alpha = rho / (2 + rho)` and
    /// `D = target - (rho / 2) * U` with `U` the terminal dual iterate.
    pub fn from_terminal_dual(
        target: &DenseMatrix,
        u_final: &DenseMatrix,
        rho: f64,
        k: usize,
    ) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid("rho must be a positive finite number"));
        }
        target.require_same_shape(u_final)?;
        let d = target.zip_map(u_final, |t, u| t - 0.5 * rho * u);
        HMapContext::new(d, rho / (2.0 + rho), k)
    }

    pub fn d(&self) -> &DenseMatrix {
        &self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// One application of `H`, plus a flag for a singular value tie at the
/// truncation boundary (the deterministic tie-break still applies).
#[derive(Clone, Debug)]
pub struct HMapResult {
    pub point: DenseMatrix,
    pub tie_detected: bool,
}

/// Applies `H(X) = truncate(alpha * X + (1 - alpha) * D, K)`.
pub fn map_h(x: &DenseMatrix, ctx: &HMapContext) -> Result<HMapResult> {
    ctx.d.require_same_shape(x)?;
    let blend = x.zip_map(&ctx.d, |xv, dv| ctx.alpha * xv + (1.0 - ctx.alpha) * dv);
    let triple = svd(&blend)?;
    let tie_detected = ctx.k < triple.sigma.len()
        && triple.sigma[ctx.k - 1] - triple.sigma[ctx.k] <= TIE_TOL;
    Ok(HMapResult {
        point: triple.truncate(ctx.k),
        tie_detected,
    })
}

/// All fixed points of `H`, one per qualifying subset of singular triples.
#[derive(Clone, Debug)]
pub struct FixedPointSet {
    pub points: Vec<DenseMatrix>,
    /// 0-based positions into the descending singular values of `D`, one
    /// subset per point.
    pub index_subsets: Vec<Vec<usize>>,
    /// Number of K-subsets of the singular values: the trivial upper bound
    /// on how many fixed points there can be.
    pub count_bound: u128,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        match result.checked_mul((n - k + i) as u128) {
            Some(v) => result = v / i as u128,
            None => return u128::MAX,
        }
    }
    result
}

/// Walks every K-subset of `{0, .., n-1}` in lexicographic order.
fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        f(&subset);
        // Advance to the next lexicographic K-subset.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        subset[i] += 1;
        for j in (i + 1)..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Enumerates all fixed points of `H` by checking each K-subset of singular
/// triples of `D`: a subset qualifies when each kept value is at least
/// `(1 - alpha)` times every discarded one.
///
/// Fails when the subset count exceeds [`ENUMERATION_CAP`]; use
/// [`is_fixed_point`] spot checks at that scale.
pub fn enumerate_fixed_points(ctx: &HMapContext) -> Result<FixedPointSet> {
    let n = ctx.d.rows().min(ctx.d.cols());
    let count_bound = binomial(n, ctx.k);
    if count_bound > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            combinations: count_bound,
            cap: ENUMERATION_CAP,
        });
    }
    let triple = svd(&ctx.d)?;
    let threshold_factor = 1.0 - ctx.alpha;
    let mut points = Vec::new();
    let mut index_subsets = Vec::new();
    for_each_subset(n, ctx.k, |subset| {
        // Values are sorted descending, so the binding comparison is the
        // smallest kept value against the largest discarded one.
        let min_kept = triple.sigma[subset[ctx.k - 1]];
        let max_discarded = (0..n)
            .find(|i| !subset.contains(i))
            .map(|i| triple.sigma[i])
            .unwrap_or(0.0);
        if min_kept >= threshold_factor * max_discarded {
            points.push(triple.reconstruct_subset(subset));
            index_subsets.push(subset.to_vec());
        }
    });
    Ok(FixedPointSet {
        points,
        index_subsets,
        count_bound,
    })
}

/// Whether `H` moves `x` by at most `tol` in Frobenius norm.
pub fn is_fixed_point(x: &DenseMatrix, ctx: &HMapContext, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::invalid("tolerance must be non-negative"));
    }
    let image = map_h(x, ctx)?;
    Ok(frob_dist(&image.point, x)? <= tol)
}

/// Fixed points of `H` that also satisfy the constraint: the only candidates
/// a constrained run can settle on once its dual stabilizes.
pub fn candidate_limit_set(
    ctx: &HMapContext,
    constraint: &ConstraintSpec,
    tol: f64,
) -> Result<Vec<DenseMatrix>> {
    let set = enumerate_fixed_points(ctx)?;
    let mut kept = Vec::new();
    for point in set.points {
        if membership(constraint, &point, tol)? {
            kept.push(point);
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::truncated_svd;

    fn diag(entries: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(entries)
    }

    #[test]
    fn context_validation_rejects_bad_parameters() {
        let d = diag(&[3.0, 2.0]);
        assert!(HMapContext::new(d.clone(), 0.0, 1).is_err());
        assert!(HMapContext::new(d.clone(), 1.0, 1).is_err());
        assert!(HMapContext::new(d.clone(), 0.5, 0).is_err());
        assert!(HMapContext::new(d.clone(), 0.5, 3).is_err());
        assert!(HMapContext::new(d, 0.5, 2).is_ok());
    }

    #[test]
    fn truncation_of_d_is_a_fixed_point() {
        let d = DenseMatrix::new(
            3,
            3,
            vec![2.0, -0.3, 0.8, 0.1, 1.4, -0.6, -0.7, 0.2, 0.9],
        )
        .unwrap();
        for k in 1..=2 {
            let ctx = HMapContext::new(d.clone(), 0.5, k).unwrap();
            let point = truncated_svd(&d, k).unwrap();
            assert!(is_fixed_point(&point, &ctx, 1e-9).unwrap());
        }
    }

    #[test]
    fn small_alpha_pulls_toward_the_truncation_of_d() {
        let d = diag(&[3.0, 2.0, 1.0]);
        let ctx = HMapContext::new(d.clone(), 1e-8, 2).unwrap();
        let x = diag(&[5.0, -1.0, 0.4]);
        let image = map_h(&x, &ctx).unwrap();
        let expected = truncated_svd(&d, 2).unwrap();
        assert!(frob_dist(&image.point, &expected).unwrap() <= 1e-6);
    }

    #[test]
    fn map_h_keeps_the_larger_blended_value() {
        // blend = 0.5 * diag(0, 2) + 0.5 * diag(3, 2) = diag(1.5, 2).
        let d = diag(&[3.0, 2.0]);
        let ctx = HMapContext::new(d, 0.5, 1).unwrap();
        let x = diag(&[0.0, 2.0]);
        let image = map_h(&x, &ctx).unwrap();
        assert!(!image.tie_detected);
        assert!(frob_dist(&image.point, &diag(&[0.0, 2.0])).unwrap() <= 1e-12);
    }

    #[test]
    fn map_h_flags_a_tie_at_the_boundary() {
        let d = diag(&[1.0, 1.0]);
        let ctx = HMapContext::new(d.clone(), 0.5, 1).unwrap();
        let image = map_h(&d, &ctx).unwrap();
        assert!(image.tie_detected);
    }

    #[test]
    fn enumeration_finds_both_fixed_points_of_a_wide_gap() {
        let ctx = HMapContext::new(diag(&[3.0, 2.0]), 0.5, 1).unwrap();
        let set = enumerate_fixed_points(&ctx).unwrap();
        assert_eq!(set.count_bound, 2);
        assert_eq!(set.index_subsets, vec![vec![0], vec![1]]);
        assert!(frob_dist(&set.points[0], &diag(&[3.0, 0.0])).unwrap() <= 1e-12);
        assert!(frob_dist(&set.points[1], &diag(&[0.0, 2.0])).unwrap() <= 1e-12);
        for point in &set.points {
            assert!(is_fixed_point(point, &ctx, 1e-9).unwrap());
        }
    }

    #[test]
    fn enumeration_drops_subsets_that_fail_the_gap_condition() {
        // 1 >= 0.5 * 3 fails, so only the leading triple survives.
        let ctx = HMapContext::new(diag(&[3.0, 1.0]), 0.5, 1).unwrap();
        let set = enumerate_fixed_points(&ctx).unwrap();
        assert_eq!(set.index_subsets, vec![vec![0]]);

        let moved = map_h(&diag(&[0.0, 1.0]), &ctx).unwrap();
        assert!(frob_dist(&moved.point, &diag(&[0.0, 1.0])).unwrap() > 1e-6);
    }

    #[test]
    fn full_rank_bound_keeps_only_d_itself() {
        let d = diag(&[3.0, 2.0]);
        let ctx = HMapContext::new(d.clone(), 0.3, 2).unwrap();
        let set = enumerate_fixed_points(&ctx).unwrap();
        assert_eq!(set.points.len(), 1);
        assert!(frob_dist(&set.points[0], &d).unwrap() <= 1e-12);
    }

    #[test]
    fn qualifying_subsets_grow_with_alpha() {
        let d = diag(&[3.0, 2.0, 1.2, 0.5]);
        let counts: Vec<usize> = [0.2, 0.5, 0.9]
            .iter()
            .map(|alpha| {
                let ctx = HMapContext::new(d.clone(), *alpha, 2).unwrap();
                enumerate_fixed_points(&ctx).unwrap().points.len()
            })
            .collect();
        assert!(counts[0] <= counts[1] && counts[1] <= counts[2]);
    }

    #[test]
    fn flat_spectrum_makes_every_subset_a_fixed_point() {
        // (1 - alpha) * sigma_max <= sigma_min, so all C(3, 1) subsets pass.
        let ctx = HMapContext::new(diag(&[1.0, 0.95, 0.9]), 0.5, 1).unwrap();
        let set = enumerate_fixed_points(&ctx).unwrap();
        assert_eq!(set.points.len() as u128, set.count_bound);
        assert_eq!(set.count_bound, 3);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let d = DenseMatrix::from_fn(30, 30, |i, j| {
            1.0 / ((i + j + 1) as f64) + if i == j { 1.0 } else { 0.0 }
        });
        let ctx = HMapContext::new(d, 0.5, 8).unwrap();
        match enumerate_fixed_points(&ctx) {
            Err(Error::EnumerationTooLarge { combinations, cap }) => {
                assert_eq!(combinations, binomial(30, 8));
                assert_eq!(cap, ENUMERATION_CAP);
            }
            other => panic!("expected the enumeration cap, got {other:?}"),
        }
    }

    #[test]
    fn from_terminal_dual_builds_the_documented_map() {
        let target = diag(&[3.0, 2.0]);
        let u = diag(&[0.5, -0.5]);
        let ctx = HMapContext::from_terminal_dual(&target, &u, 2.0, 1).unwrap();
        assert!((ctx.alpha() - 0.5).abs() <= 1e-15);
        assert!(frob_dist(ctx.d(), &diag(&[2.5, 2.5])).unwrap() <= 1e-12);
        assert!(HMapContext::from_terminal_dual(&target, &u, -1.0, 1).is_err());
    }

    #[test]
    fn candidate_limit_set_filters_by_membership() {
        let ctx = HMapContext::new(diag(&[3.0, 2.0]), 0.5, 1).unwrap();

        // Pin the top-left entry to 3: only diag(3, 0) survives.
        let mut mask = vec![false; 4];
        mask[0] = true;
        let pins = ConstraintSpec::fixed_entries(mask, diag(&[3.0, 0.0])).unwrap();
        let kept = candidate_limit_set(&ctx, &pins, 1e-6).unwrap();
        assert_eq!(kept.len(), 1);
        assert!(frob_dist(&kept[0], &diag(&[3.0, 0.0])).unwrap() <= 1e-9);

        // Unconstrained keeps everything.
        let all = candidate_limit_set(&ctx, &ConstraintSpec::Unconstrained, 1e-6).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn candidate_limit_set_drops_sign_infeasible_points() {
        // Rotate the singular directions so the trailing triple has negative
        // entries while the leading one stays positive.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let u = DenseMatrix::new(2, 2, vec![c, -c, c, c]).unwrap();
        let sigma = diag(&[3.0, 2.0]);
        let d = u.matmul(&sigma).matmul(&u.transpose());
        let ctx = HMapContext::new(d, 0.5, 1).unwrap();

        let set = enumerate_fixed_points(&ctx).unwrap();
        assert_eq!(set.points.len(), 2);
        let negatives: Vec<bool> = set
            .points
            .iter()
            .map(|p| p.data().iter().any(|v| *v < -1e-9))
            .collect();
        assert!(negatives.iter().any(|n| *n), "one triple should go negative");

        let kept = candidate_limit_set(&ctx, &ConstraintSpec::NonNegative, 1e-9).unwrap();
        assert_eq!(kept.len(), 1);
        assert!(kept[0].data().iter().all(|v| *v >= -1e-9));
    }

    #[test]
    fn binomial_matches_small_cases() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(30, 8), 5_852_925);
    }
}
