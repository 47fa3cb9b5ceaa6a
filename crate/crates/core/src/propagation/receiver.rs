use super::grid::FieldSlice;
use crate::error::{invalid, Result};
use crate::FREE_SPACE_IMPEDANCE;

/// Receiving antenna and noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverModel {
    effective_area: f64,
    impedance: f64,
    noise_power: f64,
}

impl ReceiverModel {
    pub fn new(effective_area: f64, impedance: f64, noise_power: f64) -> Result<Self> {
        for (name, v) in [
            ("effective_area", effective_area),
            ("impedance", impedance),
            ("noise_power", noise_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self {
            effective_area,
            impedance,
            noise_power,
        })
    }

    /// Isotropic antenna, `A_e = lambda^2 / 4 pi`, in free-space impedance.
    pub fn isotropic(wavelength: f64, noise_power: f64) -> Result<Self> {
        Self::new(
            wavelength * wavelength / (4.0 * std::f64::consts::PI),
            FREE_SPACE_IMPEDANCE,
            noise_power,
        )
    }

    pub fn with_noise_power(self, noise_power: f64) -> Result<Self> {
        Self::new(self.effective_area, self.impedance, noise_power)
    }

    pub fn effective_area(&self) -> f64 {
        self.effective_area
    }

    pub fn impedance(&self) -> f64 {
        self.impedance
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// `A_e |E|^2 / Z_0`.
    pub fn power_from_field(&self, field_magnitude_sqr: f64) -> f64 {
        self.effective_area * field_magnitude_sqr / self.impedance
    }
}

/// Power collected at `x_r` on the final plane.
pub fn received_power(slice: &FieldSlice, rx: &ReceiverModel, x_r: f64) -> Result<f64> {
    Ok(rx.power_from_field(slice.value_at(x_r)?.norm_sqr()))
}

/// Spectral efficiency `log2(1 + P_r / sigma^2)`, bits/s/Hz.
pub fn achievable_rate(received_power: f64, rx: &ReceiverModel) -> f64 {
    (received_power / rx.noise_power()).ln_1p() / std::f64::consts::LN_2
}
