//! Plain-text dumps of propagated fields.
//!
//! * CSV: header `x,re,im,intensity`, one row per sample.
//! * PGM: binary 8-bit grayscale (`P5`), one image row per retained plane,
//!   z increasing downward, scaled so the brightest sample is 255. Optional
//!   `#` comment lines follow the magic number.

use std::io::{self, Write};

use super::grid::FieldSlice;

pub fn write_slice_csv<W: Write>(mut out: W, slice: &FieldSlice) -> io::Result<()> {
    writeln!(out, "x,re,im,intensity")?;
    for (i, v) in slice.values().iter().enumerate() {
        writeln!(
            out,
            "{:.9e},{:.9e},{:.9e},{:.9e}",
            slice.grid().x(i),
            v.re,
            v.im,
            v.norm_sqr()
        )?;
    }
    Ok(())
}

/// Writes `rows` (equal lengths) as a peak-normalized grayscale image.
pub fn write_pgm<W: Write>(mut out: W, rows: &[Vec<f64>], comments: &[String]) -> io::Result<()> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "ragged intensity rows"));
    }
    let peak = rows.iter().flatten().copied().fold(0.0, f64::max);
    writeln!(out, "P5")?;
    for c in comments {
        if c.contains('\n') {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "multi-line PGM comment"));
        }
        writeln!(out, "# {c}")?;
    }
    write!(out, "{} {}\n255\n", width, rows.len())?;
    let pixels: Vec<u8> = rows
        .iter()
        .flatten()
        .map(|&v| if peak > 0.0 { (v / peak * 255.0).round() as u8 } else { 0 })
        .collect();
    out.write_all(&pixels)
}

/// Keeps every `stride`-th sample so wide grids fit a reasonable image.
pub fn decimate(row: &[f64], stride: usize) -> Vec<f64> {
    row.iter().step_by(stride.max(1)).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::grid::GridSpec;
    use num_complex::Complex64;

    #[test]
    fn csv_rows() {
        let g = GridSpec::new(0.0, 0.5, 2).unwrap();
        let s = FieldSlice::new(1.0, g, vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, 0.0)]).unwrap();
        let mut buf = Vec::new();
        write_slice_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "0.000000000e0,1.000000000e0,2.000000000e0,5.000000000e0");
    }

    #[test]
    fn pgm_normalized() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, &[vec![0.0, 2.0], vec![1.0, 4.0]], &["peak 4".into()]).unwrap();
        assert!(buf.starts_with(b"P5\n# peak 4\n2 2\n255\n"));
        assert_eq!(&buf[buf.len() - 4..], &[0, 128, 64, 255]);
        assert!(write_pgm(Vec::new(), &[vec![1.0], vec![1.0, 2.0]], &[]).is_err());
    }
}
