//! Image and signal quality metrics.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Quality of a test matrix against a reference. `psnr` and `snr` are in dB
/// and become `+inf` when the error is exactly zero.
#[derive(Clone, Copy, Debug)]
pub struct QualityMetrics {
    pub psnr: f64,
    pub snr: f64,
    pub mse: f64,
}

fn mse(reference: &DenseMatrix, test: &DenseMatrix) -> Result<f64> {
    reference.require_same_shape(test)?;
    let total: f64 = reference
        .data()
        .iter()
        .zip(test.data().iter())
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    Ok(total / reference.data().len() as f64)
}

/// Peak signal-to-noise ratio `10 * log10(peak^2 / mse)` in dB.
pub fn psnr(reference: &DenseMatrix, test: &DenseMatrix, peak: f64) -> Result<f64> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::invalid("peak must be a positive finite number"));
    }
    let err = mse(reference, test)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / err).log10())
}

/// Signal-to-noise ratio `10 * log10(signal_power / error_power)` in dB.
pub fn snr(reference: &DenseMatrix, test: &DenseMatrix) -> Result<f64> {
    reference.require_same_shape(test)?;
    let signal: f64 = reference.data().iter().map(|r| r * r).sum();
    let error: f64 = reference
        .data()
        .iter()
        .zip(test.data().iter())
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}

/// All three metrics at once.
pub fn quality(reference: &DenseMatrix, test: &DenseMatrix, peak: f64) -> Result<QualityMetrics> {
    Ok(QualityMetrics {
        psnr: psnr(reference, test, peak)?,
        snr: snr(reference, test)?,
        mse: mse(reference, test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_images_hit_the_infinity_sentinel() {
        let img = DenseMatrix::new(2, 2, vec![0.0, 255.0, 128.0, 64.0]).unwrap();
        let q = quality(&img, &img, 255.0).unwrap();
        assert!(q.psnr.is_infinite() && q.psnr > 0.0);
        assert!(q.snr.is_infinite() && q.snr > 0.0);
        assert_eq!(q.mse, 0.0);
        assert_eq!(format!("{}", q.psnr), "inf");
    }

    #[test]
    fn single_full_scale_error_matches_hand_psnr() {
        // One entry off by 255 out of four: mse = 255^2 / 4, so
        // psnr = 10 * log10(4) which is about 6.0206 dB.
        let reference = DenseMatrix::new(2, 2, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        let test = DenseMatrix::new(2, 2, vec![255.0, 0.0, 0.0, 0.0]).unwrap();
        let value = psnr(&reference, &test, 255.0).unwrap();
        assert_relative_eq!(value, 10.0 * 4.0f64.log10(), max_relative = 1e-12);
        assert_relative_eq!(value, 6.0205999132796242, max_relative = 1e-12);
    }

    #[test]
    fn snr_uses_signal_power_not_peak() {
        let reference = DenseMatrix::new(1, 2, vec![3.0, 4.0]).unwrap();
        let test = DenseMatrix::new(1, 2, vec![3.0, 9.0]).unwrap();
        // signal power 25, error power 25: 0 dB.
        assert_relative_eq!(snr(&reference, &test).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn metrics_validate_inputs() {
        let a = DenseMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        let b = DenseMatrix::new(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(psnr(&a, &b, 255.0).is_err());
        assert!(psnr(&a, &a, 0.0).is_err());
        assert!(snr(&a, &b).is_err());
    }
}
