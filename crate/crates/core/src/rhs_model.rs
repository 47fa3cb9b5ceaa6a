//! Radiation model of a reconfigurable holographic surface (RHS).
//!
//! A feed injects a guided reference wave that travels along the waveguide
//! and visits the elements in order. Element `n` couples out a fraction
//! `eta_n` of whatever power is still guided, so the field it radiates is
//!
//! ```text
//! M_n = sqrt(prod_{k<n}(1 - eta_k) * eta_n) * sqrt(P_t) * exp(-j k_s (x_n - x_feed))
//! ```
//!
//! The same radiated field can be written in the equivalent amplitude form
//! `sqrt(eta_eq) * m_n * s_n * sqrt(P_t) * exp(...)` with per-element
//! amplitudes `m_n`, activation flags `s_n` and one equivalent ratio `eta_eq`.
//! Both forms are implemented here together with the conversions between them.

use num_complex::Complex64;

use crate::beamformer::ApertureExcitation;
use crate::error::{invalid, Error, Result};
use crate::SPEED_OF_LIGHT;

/// Slack allowed on the power budget for accumulated rounding.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

/// Physical description of the radiating aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsConfig {
    element_count: usize,
    element_spacing: f64,
    carrier_frequency: f64,
    reference_index: f64,
    feed_power: f64,
    feed_position: f64,
}

impl RhsConfig {
    pub const DEFAULT_REFERENCE_INDEX: f64 = 2.0;

    /// `element_count` elements at `element_spacing` meters, starting at x = 0.
    pub fn new(
        element_count: usize,
        element_spacing: f64,
        carrier_frequency: f64,
        feed_power: f64,
    ) -> Result<Self> {
        if element_count < 2 {
            return Err(invalid("element_count", "need at least two elements"));
        }
        positive("element_spacing", element_spacing)?;
        positive("carrier_frequency", carrier_frequency)?;
        positive("feed_power", feed_power)?;
        Ok(Self {
            element_count,
            element_spacing,
            carrier_frequency,
            reference_index: Self::DEFAULT_REFERENCE_INDEX,
            feed_power,
            feed_position: 0.0,
        })
    }

    /// Fills the aperture `[0, aperture_length]` with elements at `element_spacing`.
    ///
    /// The element count is `floor(aperture_length / element_spacing) + 1`, so the
    /// last element sits at or just inside `aperture_length`.
    pub fn spanning(
        aperture_length: f64,
        element_spacing: f64,
        carrier_frequency: f64,
        feed_power: f64,
    ) -> Result<Self> {
        positive("aperture_length", aperture_length)?;
        positive("element_spacing", element_spacing)?;
        let count = element_count_for(aperture_length, element_spacing);
        Self::new(count, element_spacing, carrier_frequency, feed_power)
    }

    pub fn with_reference_index(mut self, reference_index: f64) -> Result<Self> {
        if !(reference_index.is_finite() && reference_index >= 1.0) {
            return Err(invalid("reference_index", "must be at least 1"));
        }
        self.reference_index = reference_index;
        Ok(self)
    }

    pub fn with_feed_position(mut self, feed_position: f64) -> Result<Self> {
        if !feed_position.is_finite() {
            return Err(invalid("feed_position", "must be finite"));
        }
        self.feed_position = feed_position;
        Ok(self)
    }

    /// Same aperture hardware with a different element spacing.
    pub fn with_spacing(&self, element_spacing: f64) -> Result<Self> {
        let mut cfg = Self::spanning(
            self.aperture_length(),
            element_spacing,
            self.carrier_frequency,
            self.feed_power,
        )?;
        cfg.reference_index = self.reference_index;
        cfg.feed_position = self.feed_position;
        Ok(cfg)
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn element_spacing(&self) -> f64 {
        self.element_spacing
    }

    /// `(N - 1) * d`.
    pub fn aperture_length(&self) -> f64 {
        (self.element_count - 1) as f64 * self.element_spacing
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Free-space wavenumber `k_f`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.carrier_frequency / SPEED_OF_LIGHT
    }

    pub fn reference_index(&self) -> f64 {
        self.reference_index
    }

    /// Guided wavenumber `k_s = n_s * k_f`.
    pub fn reference_wavenumber(&self) -> f64 {
        self.reference_index * self.wavenumber()
    }

    pub fn feed_power(&self) -> f64 {
        self.feed_power
    }

    pub fn feed_position(&self) -> f64 {
        self.feed_position
    }

    /// Position of the element with zero-based index `index`.
    pub fn element_position(&self, index: usize) -> f64 {
        index as f64 * self.element_spacing
    }

    pub fn element_positions(&self) -> Vec<f64> {
        (0..self.element_count)
            .map(|n| self.element_position(n))
            .collect()
    }

    /// Phase of the reference wave at `x`, `-k_s (x - x_feed)`.
    pub fn reference_phase(&self, x: f64) -> f64 {
        -self.reference_wavenumber() * (x - self.feed_position)
    }
}

pub(crate) fn element_count_for(aperture_length: f64, spacing: f64) -> usize {
    // the relative nudge keeps lengths that are exact multiples of the spacing
    // from losing their last element to rounding
    (aperture_length / spacing * (1.0 + 1e-12)).floor() as usize + 1
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}

/// Radiation ratios `eta_n` of the sequential coupling model.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialExcitation {
    ratios: Vec<f64>,
}

impl SequentialExcitation {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        for (index, &value) in ratios.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RatioOutOfRange { index, value });
            }
        }
        Ok(Self { ratios })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }
}

/// Amplitudes `m_n`, activations `s_n` and the equivalent ratio `eta_eq`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentExcitation {
    amplitudes: Vec<f64>,
    activation: Vec<bool>,
    equivalent_ratio: f64,
}

impl EquivalentExcitation {
    pub fn new(amplitudes: Vec<f64>, activation: Vec<bool>, equivalent_ratio: f64) -> Result<Self> {
        if amplitudes.len() != activation.len() {
            return Err(Error::LengthMismatch {
                expected: amplitudes.len(),
                actual: activation.len(),
            });
        }
        if let Some(bad) = amplitudes.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(invalid("amplitudes", format!("{bad} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&equivalent_ratio) {
            return Err(invalid(
                "equivalent_ratio",
                format!("{equivalent_ratio} is outside [0, 1]"),
            ));
        }
        let total = equivalent_ratio * active_energy(&amplitudes, &activation);
        if total > 1.0 + BUDGET_TOLERANCE {
            return Err(Error::PowerBudget { total });
        }
        Ok(Self {
            amplitudes,
            activation,
            equivalent_ratio,
        })
    }

    /// Uses `eta_eq = 1 / sum(m_n^2 s_n)` so the whole feed power is radiated.
    /// When that sum is below one the ratio is capped at 1 and part of the
    /// power stays in the waveguide.
    pub fn saturated(amplitudes: Vec<f64>, activation: Vec<bool>) -> Result<Self> {
        let energy = active_energy(&amplitudes, &activation);
        if energy <= 0.0 {
            return Err(Error::DegenerateExcitation);
        }
        Self::new(amplitudes, activation, (1.0 / energy).min(1.0))
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn activation(&self) -> &[bool] {
        &self.activation
    }

    pub fn equivalent_ratio(&self) -> f64 {
        self.equivalent_ratio
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Fraction of the feed power radiated, `eta_eq * sum(m_n^2 s_n)`.
    pub fn radiated_fraction(&self) -> f64 {
        self.equivalent_ratio * active_energy(&self.amplitudes, &self.activation)
    }
}

fn active_energy(amplitudes: &[f64], activation: &[bool]) -> f64 {
    amplitudes
        .iter()
        .zip(activation)
        .filter(|(_, &s)| s)
        .map(|(m, _)| m * m)
        .sum()
}

/// Normalized radiated amplitudes `sqrt(prod_{k<n}(1 - eta_k) * eta_n)`.
pub fn sequential_amplitudes(ratios: &[f64]) -> Vec<f64> {
    let mut guided = 1.0;
    ratios
        .iter()
        .map(|&eta| {
            let radiated = guided * eta;
            guided *= 1.0 - eta;
            radiated.sqrt()
        })
        .collect()
}

fn check_len(cfg: &RhsConfig, actual: usize) -> Result<()> {
    if actual == cfg.element_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: cfg.element_count(),
            actual,
        })
    }
}

fn with_reference_phase(cfg: &RhsConfig, amplitudes: &[f64]) -> Result<ApertureExcitation> {
    let scale = cfg.feed_power().sqrt();
    let positions = cfg.element_positions();
    let weights = positions
        .iter()
        .zip(amplitudes)
        .map(|(&x, &m)| Complex64::from_polar(m * scale, cfg.reference_phase(x)))
        .collect();
    ApertureExcitation::new(positions, weights, cfg.feed_power())
}

/// Radiated field under the sequential coupling model.
pub fn radiate_sequential(
    cfg: &RhsConfig,
    exc: &SequentialExcitation,
) -> Result<ApertureExcitation> {
    check_len(cfg, exc.len())?;
    if exc.ratios().iter().all(|&eta| eta == 0.0) {
        return Err(Error::DegenerateExcitation);
    }
    with_reference_phase(cfg, &sequential_amplitudes(exc.ratios()))
}

/// Radiated field under the equivalent amplitude model.
pub fn radiate_equivalent(
    cfg: &RhsConfig,
    exc: &EquivalentExcitation,
) -> Result<ApertureExcitation> {
    check_len(cfg, exc.len())?;
    let root = exc.equivalent_ratio().sqrt();
    let amplitudes: Vec<f64> = exc
        .amplitudes()
        .iter()
        .zip(exc.activation())
        .map(|(&m, &s)| if s { root * m } else { 0.0 })
        .collect();
    if amplitudes.iter().all(|&a| a == 0.0) {
        return Err(Error::DegenerateExcitation);
    }
    with_reference_phase(cfg, &amplitudes)
}

/// Sequential ratios to the equivalent form.
///
/// Amplitudes are normalized to their maximum and every element is marked
/// active; `eta_eq = 1 / sum(m_n^2)` saturates the power budget, so the result
/// reproduces the amplitude profile up to one global scale factor.
pub fn sequential_to_equivalent(exc: &SequentialExcitation) -> Result<EquivalentExcitation> {
    let raw = sequential_amplitudes(exc.ratios());
    let peak = raw.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::DegenerateExcitation);
    }
    let amplitudes: Vec<f64> = raw.iter().map(|m| (m / peak).min(1.0)).collect();
    let activation = vec![true; amplitudes.len()];
    EquivalentExcitation::saturated(amplitudes, activation)
}

/// Equivalent form back to sequential ratios.
///
/// `eta_n = eta_eq m_n^2 s_n / (1 - eta_eq sum_{k<n} m_k^2 s_k)`. The
/// denominator (power still guided when element `n` is reached) is evaluated
/// as the unused budget plus the tail sum `eta_eq sum_{k>=n} m_k^2 s_k`, which
/// keeps full relative precision after most of the power has been coupled out.
pub fn equivalent_to_sequential(exc: &EquivalentExcitation) -> Result<SequentialExcitation> {
    let eta_eq = exc.equivalent_ratio();
    let energies: Vec<f64> = exc
        .amplitudes()
        .iter()
        .zip(exc.activation())
        .map(|(&m, &s)| if s { m * m } else { 0.0 })
        .collect();
    let total: f64 = energies.iter().sum();
    let unused = (1.0 - eta_eq * total).max(0.0);
    let unused = if unused < 4.0 * f64::EPSILON { 0.0 } else { unused };

    let mut tail: Vec<f64> = energies
        .iter()
        .rev()
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect();
    tail.reverse();

    let ratios = energies
        .iter()
        .zip(&tail)
        .map(|(&energy, &rest)| {
            let numerator = eta_eq * energy;
            if numerator == 0.0 {
                0.0
            } else {
                (numerator / (unused + eta_eq * rest)).min(1.0)
            }
        })
        .collect();
    SequentialExcitation::new(ratios)
}
