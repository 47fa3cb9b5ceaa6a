use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{FieldSlice, GridSpec};
use crate::error::{invalid, Result};

/// Per-plane attenuation: samples `lo..hi` are multiplied by `factor`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockageMask {
    segments: Vec<(usize, usize, f64)>,
}

impl BlockageMask {
    pub fn clear() -> Self {
        Self::default()
    }

    pub fn is_clear(&self) -> bool {
        self.segments.is_empty()
    }

    /// Attenuates the half-open sample range `lo..hi` by `factor`. Overlapping
    /// segments multiply.
    pub fn with_segment(mut self, lo: usize, hi: usize, factor: f64) -> Self {
        if hi > lo {
            self.segments.push((lo, hi, factor));
        }
        self
    }

    pub fn segments(&self) -> &[(usize, usize, f64)] {
        &self.segments
    }

    pub fn apply(&self, values: &mut [Complex64]) {
        for &(lo, hi, factor) in &self.segments {
            let hi = hi.min(values.len());
            for v in &mut values[lo.min(hi)..hi] {
                *v *= factor;
            }
        }
    }
}

/// Raised-cosine edge weights covering `fraction` of the samples on each side.
pub fn absorber_profile(count: usize, fraction: f64) -> Vec<f64> {
    let mut w = vec![1.0; count];
    let m = (fraction.clamp(0.0, 0.5) * count as f64) as usize;
    for i in 0..m {
        let r = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / m as f64).cos());
        w[i] = r;
        w[count - 1 - i] = r;
    }
    w
}

/// Precomputed angular-spectrum step of length `dz` on one grid.
///
/// Each spectral component is advanced by `exp(-j dz sqrt(k^2 - kx^2))`;
/// components with `|kx| > k` are dropped. The inverse FFT normalization is
/// folded into the transfer function.
#[derive(Clone)]
pub struct AngularSpectrum {
    grid: GridSpec,
    wavenumber: f64,
    dz: f64,
    transfer: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for AngularSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AngularSpectrum")
            .field("grid", &self.grid)
            .field("wavenumber", &self.wavenumber)
            .field("dz", &self.dz)
            .finish_non_exhaustive()
    }
}

impl AngularSpectrum {
    pub fn new(grid: GridSpec, wavenumber: f64, dz: f64) -> Result<Self> {
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(invalid("wavenumber", "must be positive"));
        }
        if !(dz.is_finite() && dz >= 0.0) {
            return Err(invalid("plane_spacing", format!("must be nonnegative, got {dz}")));
        }
        let n = grid.count();
        let scale = 1.0 / n as f64;
        let transfer = (0..n)
            .map(|i| {
                let kx = grid.kx(i);
                if kx.abs() <= wavenumber {
                    let kz = (wavenumber * wavenumber - kx * kx).sqrt();
                    Complex64::from_polar(scale, -dz * kz)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            wavenumber,
            dz,
            transfer,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Scratch buffer sized for [`Self::advance`].
    pub fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len]
    }

    /// Advances `values` by one step in place.
    pub fn advance(&self, values: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(values, scratch);
        for (v, h) in values.iter_mut().zip(&self.transfer) {
            *v *= h;
        }
        self.inverse.process_with_scratch(values, scratch);
    }

    /// `sum |E|^2` restricted to propagating components, via Parseval.
    pub fn band_limited_energy(&self, values: &[Complex64]) -> f64 {
        let mut spectrum = values.to_vec();
        let mut scratch = self.scratch();
        self.forward.process_with_scratch(&mut spectrum, &mut scratch);
        let inside: f64 = spectrum
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.kx(*i).abs() <= self.wavenumber)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        inside / self.grid.count() as f64
    }
}

/// One angular-spectrum step followed by the blockage mask of the new plane.
pub fn asm_step(slice: &FieldSlice, dz: f64, wavenumber: f64, mask: &BlockageMask) -> Result<FieldSlice> {
    let spectrum = AngularSpectrum::new(*slice.grid(), wavenumber, dz)?;
    let mut values = slice.values().to_vec();
    let mut scratch = spectrum.scratch();
    spectrum.advance(&mut values, &mut scratch);
    mask.apply(&mut values);
    FieldSlice::new(slice.z() + dz, *slice.grid(), values)
}
