//! File formats used by the experiment runners: CSV matrices and binary PGM.
//!
//! Floats are always written with [`fmt_float`] (17 significant digits) so a
//! value survives a write/read round trip bit for bit and repeated runs
//! produce byte-identical files.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Canonical float formatting: scientific notation with 16 fractional digits,
/// enough to round-trip any f64. Infinities render as `inf` / `-inf`.
pub fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:.16e}", x)
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Write a matrix as plain CSV, one row per line, no header.
pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_float(m[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a headerless CSV of numbers into a matrix. Rows must all have the
/// same number of fields and every value must be finite.
pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| {
                parse_error(path, format!("line {}: bad number {:?}", lineno + 1, field))
            })?;
            if !value.is_finite() {
                return Err(parse_error(
                    path,
                    format!("line {}: non-finite value", lineno + 1),
                ));
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_error(
                    path,
                    format!(
                        "line {}: expected {} fields, found {}",
                        lineno + 1,
                        first.len(),
                        row.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }
    let cols = rows[0].len();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    DenseMatrix::new(data.len() / cols, cols, data)
}

/// Write CSV with a header line followed by data rows. Fields are written
/// verbatim, so callers format floats themselves (see [`fmt_float`]).
pub fn write_csv_rows(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 32);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write a matrix as a binary (P5) PGM image with maxval 255. Values are
/// clamped to [0, 255] and rounded to the nearest integer.
pub fn write_pgm(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(32 + m.rows() * m.cols());
    bytes.extend_from_slice(format!("P5\n{} {}\n255\n", m.cols(), m.rows()).as_bytes());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            bytes.push(m[(i, j)].clamp(0.0, 255.0).round() as u8);
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// Read a binary (P5) PGM image with maxval at most 255.
pub fn read_pgm(path: &Path) -> Result<DenseMatrix> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;

    // Header tokens are separated by whitespace; `#` comments run to the end
    // of the line. After the maxval token, exactly one whitespace byte
    // precedes the raster.
    let mut next_token = |bytes: &[u8]| -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(parse_error(path, "truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    if next_token(&bytes)? != "P5" {
        return Err(parse_error(path, "not a binary PGM (missing P5 magic)"));
    }
    let cols: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| parse_error(path, "bad width"))?;
    let rows: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| parse_error(path, "bad height"))?;
    let maxval: u32 = next_token(&bytes)?
        .parse()
        .map_err(|_| parse_error(path, "bad maxval"))?;
    if maxval == 0 || maxval > 255 {
        return Err(parse_error(path, "maxval must be in 1..=255"));
    }
    // Single whitespace byte between header and raster.
    pos += 1;
    let needed = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_error(path, "image dimensions overflow"))?;
    if needed == 0 {
        return Err(parse_error(path, "image has zero pixels"));
    }
    if bytes.len() < pos + needed {
        return Err(parse_error(path, "raster shorter than header promises"));
    }
    let data: Vec<f64> = bytes[pos..pos + needed].iter().map(|&b| b as f64).collect();
    DenseMatrix::new(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_float_round_trips_and_handles_infinity() {
        for &x in &[
            0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            1e-300,
            -2.2250738585072014e-308,
            6.02059991327962e0,
        ] {
            let parsed: f64 = fmt_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "round trip failed for {x}");
        }
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn matrix_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DenseMatrix::new(2, 3, vec![1.0, -2.5, 3.0e-7, 0.1, 0.2, 0.3]).unwrap();
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back.shape(), (2, 3));
        for (a, b) in m.data().iter().zip(back.data().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2,3\n4,5\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
    }

    #[test]
    fn pgm_round_trip_preserves_integer_images() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = DenseMatrix::new(2, 3, vec![0.0, 255.0, 7.0, 128.0, 64.0, 1.0]).unwrap();
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.shape(), (2, 3));
        assert_eq!(back.data(), img.data());

        // Header must be exactly the canonical P5 layout.
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), "P5\n3 2\n255\n".len() + 6);
    }

    #[test]
    fn pgm_write_clamps_and_rounds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clamp.pgm");
        let img = DenseMatrix::new(1, 4, vec![-3.0, 300.0, 127.4, 127.6]).unwrap();
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.data(), &[0.0, 255.0, 127.0, 128.0]);
    }

    #[test]
    fn pgm_reader_tolerates_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("comment.pgm");
        let mut bytes = b"P5\n# a comment\n2 1\n# another\n255\n".to_vec();
        bytes.extend_from_slice(&[9, 200]);
        std::fs::write(&path, &bytes).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.shape(), (1, 2));
        assert_eq!(back.data(), &[9.0, 200.0]);
    }

    #[test]
    fn pgm_reader_rejects_truncated_raster() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.pgm");
        std::fs::write(&path, b"P5\n4 4\n255\nabc").unwrap();
        assert!(read_pgm(&path).is_err());
    }
}
