use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Uniform x-sampling `x_i = start + i * dx`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    start: f64,
    dx: f64,
    count: usize,
}

impl GridSpec {
    /// `count` must be a power of two.
    pub fn new(start: f64, dx: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(invalid("grid.start", "must be finite"));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(invalid("grid.dx", format!("must be positive, got {dx}")));
        }
        if count < 2 || !count.is_power_of_two() {
            return Err(invalid("grid.count", format!("must be a power of two >= 2, got {count}")));
        }
        Ok(Self { start, dx, count })
    }

    /// Smallest power-of-two grid with step `dx` covering `[lo, hi]`, padded
    /// evenly on both sides and aligned so that x = 0 is a sample.
    pub fn covering(lo: f64, hi: f64, dx: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid("grid.extent", format!("[{lo}, {hi}] is empty")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(invalid("grid.dx", format!("must be positive, got {dx}")));
        }
        let first = (lo / dx).floor() as i64;
        let last = (hi / dx).ceil() as i64;
        let needed = (last - first + 1) as usize;
        let count = needed.next_power_of_two().max(2);
        let pad = ((count - needed) / 2) as i64;
        Self::new((first - pad) as f64 * dx, dx, count)
    }

    /// Largest step not above `wavelength / 8` that divides every spacing in
    /// `spacings` an integer number of times, so each element lands on a sample.
    /// With several spacings the finest resulting step is used.
    pub fn default_step(wavelength: f64, spacings: &[f64]) -> f64 {
        let target = wavelength / 8.0;
        spacings
            .iter()
            .map(|&d| d / (d / target * (1.0 - 1e-12)).ceil().max(1.0))
            .fold(target, f64::min)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn x(&self, index: usize) -> f64 {
        self.start + index as f64 * self.dx
    }

    pub fn end(&self) -> f64 {
        self.x(self.count - 1)
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x <= self.end()
    }

    pub fn nearest_index(&self, x: f64) -> Result<usize> {
        let half = 0.5 * self.dx;
        if !(x >= self.start - half && x < self.end() + half) {
            return Err(Error::OutsideGrid {
                x,
                start: self.start,
                end: self.end(),
            });
        }
        Ok((((x - self.start) / self.dx).round() as usize).min(self.count - 1))
    }

    /// Spatial frequency of FFT bin `index`, rad/m.
    pub fn kx(&self, index: usize) -> f64 {
        let n = self.count as i64;
        let i = index as i64;
        let signed = if i < n / 2 { i } else { i - n };
        2.0 * std::f64::consts::PI * signed as f64 / (self.count as f64 * self.dx)
    }
}

/// Complex field sampled on a grid at depth `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSlice {
    z: f64,
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl FieldSlice {
    pub fn new(z: f64, grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::LengthMismatch {
                expected: grid.count(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field", "values must be finite"));
        }
        Ok(Self { z, grid, values })
    }

    pub fn zeros(z: f64, grid: GridSpec) -> Self {
        Self {
            z,
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.count()],
        }
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `sum |E_i|^2`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Field at `x` by linear interpolation between neighbouring samples.
    pub fn value_at(&self, x: f64) -> Result<Complex64> {
        if !self.grid.contains(x) {
            return Err(Error::OutsideGrid {
                x,
                start: self.grid.start(),
                end: self.grid.end(),
            });
        }
        let pos = (x - self.grid.start()) / self.grid.dx();
        let i = (pos.floor() as usize).min(self.grid.count() - 2);
        let t = pos - i as f64;
        Ok(self.values[i] * (1.0 - t) + self.values[i + 1] * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_aligns_zero_and_pads() {
        let g = GridSpec::covering(-0.5, 0.5, 3e-4).unwrap();
        assert_eq!(g.count(), 4096);
        assert!(g.start() <= -0.5 && g.end() >= 0.5);
        let i0 = g.nearest_index(0.0).unwrap();
        assert!(g.x(i0).abs() < 1e-15);
    }

    #[test]
    fn default_step_divides_spacings() {
        let lambda = 0.003;
        let dx = GridSpec::default_step(lambda, &[lambda / 10.0, lambda / 5.0, lambda / 2.0]);
        assert!((dx - lambda / 10.0).abs() < 1e-18);
        let dx = GridSpec::default_step(lambda, &[lambda / 2.0]);
        assert!((dx - lambda / 8.0).abs() < 1e-18);
    }

    #[test]
    fn frequencies_wrap() {
        let g = GridSpec::new(0.0, 0.5, 8).unwrap();
        let step = 2.0 * std::f64::consts::PI / 4.0;
        assert_eq!(g.kx(0), 0.0);
        assert!((g.kx(3) - 3.0 * step).abs() < 1e-15);
        assert!((g.kx(4) + 4.0 * step).abs() < 1e-15);
        assert!((g.kx(7) + step).abs() < 1e-15);
    }

    #[test]
    fn interpolation() {
        let g = GridSpec::new(0.0, 1.0, 4).unwrap();
        let values = (0..4).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let s = FieldSlice::new(0.0, g, values).unwrap();
        assert_eq!(s.value_at(1.25).unwrap(), Complex64::new(1.25, -1.25));
        assert_eq!(s.value_at(3.0).unwrap(), Complex64::new(3.0, -3.0));
        assert!(s.value_at(3.5).is_err());
        assert!(GridSpec::new(0.0, 1.0, 6).is_err());
    }
}
