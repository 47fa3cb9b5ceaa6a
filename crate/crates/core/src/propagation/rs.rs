//! Direct Rayleigh-Sommerfeld quadrature, O(count^2). Used to validate the
//! angular-spectrum stepper.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use super::grid::FieldSlice;
use crate::error::{invalid, Result};

/// Integration kernel for [`rs_direct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RsKernel {
    /// First-kind kernel of the 2-D (x, z) problem,
    /// `-(j k dz / 2r) H1^(2)(k r)`. Its plane-wave spectrum is exactly the
    /// angular-spectrum transfer function, so this is the right oracle for a
    /// field that is uniform along y.
    #[default]
    Cylindrical,
    /// Point-source kernel `dz exp(-j k r) / (2 pi r^2) (j k + 1/r)`
    /// integrated along x only. This describes a field confined to the y = 0
    /// line rather than a 2-D slab and does not match the 2-D propagator.
    Spherical,
}

impl RsKernel {
    pub fn eval(self, wavenumber: f64, dx: f64, dz: f64) -> Complex64 {
        let r = dx.hypot(dz);
        let kr = wavenumber * r;
        match self {
            Self::Cylindrical => {
                let h = Complex64::new(bessel_j1(kr), -bessel_y1(kr));
                Complex64::new(0.0, -wavenumber * dz / (2.0 * r)) * h
            }
            Self::Spherical => {
                Complex64::from_polar(dz / (2.0 * PI * r * r), -kr)
                    * Complex64::new(1.0 / r, wavenumber)
            }
        }
    }
}

/// Field at depth `slice.z + dz` by direct quadrature over the slice samples.
pub fn rs_direct(slice: &FieldSlice, dz: f64, wavenumber: f64, kernel: RsKernel) -> Result<FieldSlice> {
    if !(dz.is_finite() && dz > 0.0) {
        return Err(invalid("plane_spacing", format!("must be positive, got {dz}")));
    }
    let grid = *slice.grid();
    let step = grid.dx();
    let n = grid.count();
    // the kernel depends only on the sample offset, so tabulate it once
    let table: Vec<Complex64> = (0..n)
        .map(|offset| kernel.eval(wavenumber, offset as f64 * step, dz) * step)
        .collect();
    let input = slice.values();
    let values = (0..n)
        .map(|i| {
            input
                .iter()
                .enumerate()
                .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                .map(|(j, v)| v * table[i.abs_diff(j)])
                .sum()
        })
        .collect();
    FieldSlice::new(slice.z() + dz, grid, values)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

/// Bessel function of the second kind, order 0, `x > 0`.
pub fn bessel_y0(x: f64) -> f64 {
    bessel_y(0, x)
}

/// Bessel function of the second kind, order 1, `x > 0`.
pub fn bessel_y1(x: f64) -> f64 {
    bessel_y(1, x)
}

fn bessel_j(order: u32, x: f64) -> f64 {
    let sign = if order == 1 && x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    if x < SERIES_LIMIT {
        sign * series(order, x).0
    } else {
        sign * hankel_asymptotic(order, x).0
    }
}

fn bessel_y(order: u32, x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series(order, x).1
    } else {
        hankel_asymptotic(order, x).1
    }
}

/// Ascending series for `(J_n, Y_n)`, n in {0, 1}.
fn series(order: u32, x: f64) -> (f64, f64) {
    let half = x / 2.0;
    let q = -half * half;
    // term_k = (-x^2/4)^k (x/2)^n / (k! (n+k)!)
    let mut term = if order == 0 { 1.0 } else { half };
    let mut harmonic_k = 0.0;
    let mut harmonic_nk = if order == 0 { 0.0 } else { 1.0 };
    let mut j = 0.0;
    let mut digamma_sum = 0.0;
    for k in 0..200u32 {
        j += term;
        // psi(k+1) + psi(n+k+1) with psi(m+1) = -gamma + H_m
        digamma_sum += (harmonic_k + harmonic_nk - 2.0 * EULER_GAMMA) * term;
        let k1 = f64::from(k + 1);
        term *= q / (k1 * (k1 + f64::from(order)));
        harmonic_k += 1.0 / k1;
        harmonic_nk += 1.0 / (k1 + f64::from(order));
        if term.abs() < 1e-18 * j.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    let log_term = 2.0 / PI * j * half.ln();
    let y = match order {
        0 => log_term - digamma_sum / PI,
        _ => log_term - 1.0 / (PI * half) - digamma_sum / PI,
    };
    (j, y)
}

/// Hankel's large-argument expansion for `(J_n, Y_n)`, truncated at its
/// smallest term.
fn hankel_asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * f64::from(order * order);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        if next.abs() >= last || next == 0.0 {
            break;
        }
        last = next.abs();
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let omega = x - f64::from(order) * FRAC_PI_2 - FRAC_PI_4;
    let scale = (2.0 / (PI * x)).sqrt();
    let (s, c) = omega.sin_cos();
    (scale * (p * c - q * s), scale * (p * s + q * c))
}
