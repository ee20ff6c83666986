//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Uniform `[0, 1]` entries from the given seed.
pub fn gen_nonneg_instance(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random::<f64>()).collect(),
    )
}

/// Splits `0..total` into `bands` contiguous non-empty runs with seeded cuts;
/// returns the band index of each position.
fn seeded_bands(total: usize, bands: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut interior: Vec<usize> = (1..total).collect();
    interior.shuffle(rng);
    let mut cuts: Vec<usize> = interior.into_iter().take(bands - 1).collect();
    cuts.sort_unstable();
    cuts.push(total);
    let mut labels = Vec::with_capacity(total);
    let mut band = 0;
    for pos in 0..total {
        if pos >= cuts[band] {
            band += 1;
        }
        labels.push(band);
    }
    labels
}

/// Binary test image with entries in `{0, 255}` and rank exactly `rank`.
///
/// Rows are split into `rank` bands, columns into `rank + 1` bands when they
/// fit (`rank` otherwise), and each row band lights exactly one column band,
/// no two the same. The image is a sum of `rank` disjoint bright blocks, so
/// its rank is exact and its singular values all sit at the same scale,
/// `255 * sqrt(block area)`. The seed drives the band widths and which
/// column band each row band picks.
pub fn synth_low_rank_image(
    rows: usize,
    cols: usize,
    rank: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("image dimensions must be positive"));
    }
    if rank == 0 || rank > rows.min(cols) {
        return Err(Error::invalid(format!(
            "image rank must lie in 1..={}, got {rank}",
            rows.min(cols)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row_band = seeded_bands(rows, rank, &mut rng);
    let col_band_count = if cols > rank { rank + 1 } else { rank };
    let col_band = seeded_bands(cols, col_band_count, &mut rng);

    // lit[r] = the column band that row band r lights; injective, so the
    // row patterns are distinct indicators of disjoint column bands.
    let mut picks: Vec<usize> = (0..col_band_count).collect();
    picks.shuffle(&mut rng);
    let lit: Vec<usize> = picks.into_iter().take(rank).collect();

    Ok(DenseMatrix::from_fn(rows, cols, |i, j| {
        if col_band[j] == lit[row_band[i]] {
            255.0
        } else {
            0.0
        }
    }))
}

/// Adds iid Gaussian noise with standard deviation `sigma`; values are left
/// unclipped so the result lives in the solver's real-valued space.
pub fn add_gaussian_noise(image: &DenseMatrix, sigma: f64, seed: u64) -> Result<DenseMatrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("noise level must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = image
        .data()
        .iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::new(image.rows(), image.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::numerical_rank;

    #[test]
    fn nonneg_instance_is_deterministic_and_centered() {
        let a = gen_nonneg_instance(100, 80, 42).unwrap();
        let b = gen_nonneg_instance(100, 80, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_nonneg_instance(100, 80, 43).unwrap();
        assert_ne!(a, c);

        assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
        let mean: f64 = a.data().iter().sum::<f64>() / (a.data().len() as f64);
        assert!((mean - 0.5).abs() <= 0.02, "mean {mean} drifted");
    }

    #[test]
    fn synthetic_image_is_binary_with_exact_rank() {
        for (rows, cols, rank, seed) in [(60, 120, 5, 42), (20, 20, 1, 3), (7, 9, 7, 11)] {
            let img = synth_low_rank_image(rows, cols, rank, seed).unwrap();
            assert!(img.data().iter().all(|v| *v == 0.0 || *v == 255.0));
            assert_eq!(numerical_rank(&img, 1e-9).unwrap(), rank);
        }
    }

    #[test]
    fn synthetic_image_is_seed_stable() {
        let a = synth_low_rank_image(30, 50, 4, 9).unwrap();
        let b = synth_low_rank_image(30, 50, 4, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_low_rank_image(30, 50, 4, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_image_rejects_infeasible_ranks() {
        assert!(synth_low_rank_image(10, 20, 0, 0).is_err());
        assert!(synth_low_rank_image(10, 20, 11, 0).is_err());
    }

    #[test]
    fn noise_is_deterministic_and_matches_its_level() {
        let img = synth_low_rank_image(60, 120, 5, 1).unwrap();
        let a = add_gaussian_noise(&img, 100.0, 2).unwrap();
        let b = add_gaussian_noise(&img, 100.0, 2).unwrap();
        assert_eq!(a, b);

        let zero = add_gaussian_noise(&img, 0.0, 2).unwrap();
        assert_eq!(zero, img);

        let diffs: Vec<f64> = a
            .data()
            .iter()
            .zip(img.data().iter())
            .map(|(n, o)| n - o)
            .collect();
        let mean: f64 = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var: f64 =
            diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64;
        let std = var.sqrt();
        assert!(
            (std - 100.0).abs() <= 5.0,
            "sample std {std} too far from 100"
        );

        assert!(add_gaussian_noise(&img, -1.0, 2).is_err());
    }
}
