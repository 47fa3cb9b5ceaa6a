//! Aperture excitations for the holographic surface and the phase-only ULA.
//!
//! Phases follow the outgoing-wave convention `exp(-j k r)` used by the
//! propagator: a wave that should converge at distance `R` carries phase
//! `+k R`, and a beam that should follow trajectory `f` carries `-phi(x)`.
//! The holographic surface cannot set phases. It weights each element by how
//! well the reference wave already matches the desired phase,
//! `m_n = (cos(target_n - reference_n) + 1) / 2`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::rhs_model::{element_count_for, radiate_equivalent, EquivalentExcitation, RhsConfig, BUDGET_TOLERANCE};
use crate::trajectory::{feasible_offset, OffsetCheck, Point, Trajectory};
use crate::SPEED_OF_LIGHT;

/// Complex element excitations `M_n` at positions `x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureExcitation {
    positions: Vec<f64>,
    weights: Vec<Complex64>,
    feed_power: f64,
}

impl ApertureExcitation {
    /// `feed_power` is the budget `P_t`; the radiated power may not exceed it.
    pub fn new(positions: Vec<f64>, weights: Vec<Complex64>, feed_power: f64) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                actual: weights.len(),
            });
        }
        if positions.iter().any(|x| !x.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("excitation", "positions and weights must be finite"));
        }
        if !(feed_power.is_finite() && feed_power > 0.0) {
            return Err(invalid("feed_power", "must be positive"));
        }
        let total: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
        if total > feed_power * (1.0 + BUDGET_TOLERANCE) {
            return Err(Error::PowerBudget {
                total: total / feed_power,
            });
        }
        Ok(Self {
            positions,
            weights,
            feed_power,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn feed_power(&self) -> f64 {
        self.feed_power
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum |M_n|^2`.
    pub fn radiated_power(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    /// All weights multiplied by `factor`; the budget scales by `factor^2`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.positions.clone(),
            self.weights.iter().map(|w| w * factor).collect(),
            self.feed_power * factor * factor,
        )
    }
}

/// Phase-only uniform linear array.
#[derive(Debug, Clone, PartialEq)]
pub struct UlaConfig {
    element_count: usize,
    element_spacing: f64,
    carrier_frequency: f64,
    feed_power: f64,
}

impl UlaConfig {
    /// Fills `[0, aperture_length]` at `element_spacing`.
    pub fn spanning(
        aperture_length: f64,
        element_spacing: f64,
        carrier_frequency: f64,
        feed_power: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("aperture_length", aperture_length),
            ("element_spacing", element_spacing),
            ("carrier_frequency", carrier_frequency),
            ("feed_power", feed_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self {
            element_count: element_count_for(aperture_length, element_spacing),
            element_spacing,
            carrier_frequency,
            feed_power,
        })
    }

    /// Half-wavelength array over the same aperture as `rhs`.
    pub fn matching(rhs: &RhsConfig) -> Result<Self> {
        Self::spanning(
            rhs.aperture_length(),
            rhs.wavelength() / 2.0,
            rhs.carrier_frequency(),
            rhs.feed_power(),
        )
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn element_spacing(&self) -> f64 {
        self.element_spacing
    }

    pub fn aperture_length(&self) -> f64 {
        (self.element_count - 1) as f64 * self.element_spacing
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn feed_power(&self) -> f64 {
        self.feed_power
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }

    pub fn element_positions(&self) -> Vec<f64> {
        (0..self.element_count)
            .map(|n| n as f64 * self.element_spacing)
            .collect()
    }
}

/// Either transmitter architecture, so experiments can treat them alike.
#[derive(Debug, Clone, PartialEq)]
pub enum Transmitter {
    Rhs(RhsConfig),
    Ula(UlaConfig),
}

impl Transmitter {
    pub fn element_positions(&self) -> Vec<f64> {
        match self {
            Self::Rhs(cfg) => cfg.element_positions(),
            Self::Ula(cfg) => cfg.element_positions(),
        }
    }

    pub fn element_spacing(&self) -> f64 {
        match self {
            Self::Rhs(cfg) => cfg.element_spacing(),
            Self::Ula(cfg) => cfg.element_spacing(),
        }
    }

    pub fn aperture_length(&self) -> f64 {
        match self {
            Self::Rhs(cfg) => cfg.aperture_length(),
            Self::Ula(cfg) => cfg.aperture_length(),
        }
    }

    pub fn wavelength(&self) -> f64 {
        match self {
            Self::Rhs(cfg) => cfg.wavelength(),
            Self::Ula(cfg) => cfg.wavelength(),
        }
    }

    pub fn wavenumber(&self) -> f64 {
        match self {
            Self::Rhs(cfg) => cfg.wavenumber(),
            Self::Ula(cfg) => cfg.wavenumber(),
        }
    }

    pub fn feed_power(&self) -> f64 {
        match self {
            Self::Rhs(cfg) => cfg.feed_power(),
            Self::Ula(cfg) => cfg.feed_power(),
        }
    }

    pub fn offset_check(&self, traj: &Trajectory, min_active: usize) -> OffsetCheck {
        feasible_offset(traj.sign(), traj.c(), &self.element_positions(), min_active)
    }

    pub fn airy(&self, traj: &Trajectory, min_active: usize) -> Result<ApertureExcitation> {
        match self {
            Self::Rhs(cfg) => airy_rhs(cfg, traj, min_active),
            Self::Ula(cfg) => Ok(airy_ula(cfg, traj)),
        }
    }

    pub fn focused(&self, target: Point) -> Result<ApertureExcitation> {
        match self {
            Self::Rhs(cfg) => focused_rhs(cfg, target),
            Self::Ula(cfg) => focused_ula(cfg, target),
        }
    }
}

/// Holographic weights for arbitrary per-element target phases.
///
/// Elements with `active[n] == false` are switched off; the equivalent ratio
/// is chosen to radiate the whole feed power.
pub fn holographic(cfg: &RhsConfig, target_phase: &[f64], active: &[bool]) -> Result<ApertureExcitation> {
    let amplitudes = cfg
        .element_positions()
        .iter()
        .zip(target_phase)
        .map(|(&x, &phase)| ((phase - cfg.reference_phase(x)).cos() + 1.0) / 2.0)
        .collect();
    let exc = EquivalentExcitation::saturated(amplitudes, active.to_vec())?;
    radiate_equivalent(cfg, &exc)
}

/// Holographic Airy beam along `traj`.
pub fn airy_rhs(cfg: &RhsConfig, traj: &Trajectory, min_active: usize) -> Result<ApertureExcitation> {
    let positions = cfg.element_positions();
    let check = feasible_offset(traj.sign(), traj.c(), &positions, min_active);
    if !check.feasible {
        return Err(Error::InfeasibleOffset {
            c: traj.c(),
            reason: format!(
                "{} active elements, at least {} required",
                check.active_count, min_active
            ),
        });
    }
    let k = cfg.wavenumber();
    let active: Vec<bool> = positions.iter().map(|&x| traj.is_valid_at(x)).collect();
    let target = positions
        .iter()
        .zip(&active)
        .map(|(&x, &on)| if on { traj.phase(k, x).map(|p| -p) } else { Ok(0.0) })
        .collect::<Result<Vec<f64>>>()?;
    holographic(cfg, &target, &active)
}

/// Phase-only Airy beam. Elements without a tangent ray keep phase 0 and
/// still radiate, which distorts the beam when `c` lies inside the aperture.
pub fn airy_ula(cfg: &UlaConfig, traj: &Trajectory) -> ApertureExcitation {
    let k = cfg.wavenumber();
    let amplitude = (cfg.feed_power() / cfg.element_count() as f64).sqrt();
    let positions = cfg.element_positions();
    let weights = positions
        .iter()
        .map(|&x| {
            let phase = traj.phase(k, x).map(|p| -p).unwrap_or(0.0);
            Complex64::from_polar(amplitude, phase)
        })
        .collect();
    ApertureExcitation::new(positions, weights, cfg.feed_power())
        .expect("uniform phase-only weights stay within budget")
}

fn focus_phase(k: f64, x: f64, target: Point) -> f64 {
    k * (x - target.x).hypot(target.z)
}

fn check_target(target: Point) -> Result<()> {
    if target.z.is_finite() && target.z > 0.0 && target.x.is_finite() {
        Ok(())
    } else {
        Err(invalid("focus_target", "needs finite x and z > 0"))
    }
}

/// Near-field focusing through the holographic amplitude rule.
pub fn focused_rhs(cfg: &RhsConfig, target: Point) -> Result<ApertureExcitation> {
    check_target(target)?;
    let k = cfg.wavenumber();
    let phases: Vec<f64> = cfg
        .element_positions()
        .iter()
        .map(|&x| focus_phase(k, x, target))
        .collect();
    holographic(cfg, &phases, &vec![true; phases.len()])
}

/// Phase-conjugate focusing with uniform amplitudes.
pub fn focused_ula(cfg: &UlaConfig, target: Point) -> Result<ApertureExcitation> {
    check_target(target)?;
    let k = cfg.wavenumber();
    let amplitude = (cfg.feed_power() / cfg.element_count() as f64).sqrt();
    let positions = cfg.element_positions();
    let weights = positions
        .iter()
        .map(|&x| Complex64::from_polar(amplitude, focus_phase(k, x, target)))
        .collect();
    ApertureExcitation::new(positions, weights, cfg.feed_power())
}
