//! Scenario files.
//!
//! A scenario is a TOML document with the sections below; every key is
//! optional and falls back to the built-in scenario (100 GHz, 0.2 m aperture,
//! opaque block `[-0.1, 0.1] x [0.5, 0.6]` m, user at `(-0.2, 2.4)` m).
//! Unknown keys are rejected.
//!
//! ```toml
//! [rhs]
//! frequency = 100e9            # Hz
//! aperture_length = 0.2        # m
//! spacing_wavelengths = 0.1    # element spacing / lambda
//! reference_index = 2.0        # guided-wave index n_s
//! feed_power = 1.0             # W
//! feed_position = 0.0          # m
//!
//! [scene]
//! user = [-0.2, 2.4]           # (x, z), m
//! plane_spacing = 0.005        # m
//! obstacles = [{ x = -0.1, z = 0.5, width = 0.2, depth = 0.1, attenuation = 0.0 }]
//!
//! [propagation]
//! # dx = 3e-4                  # m; default: largest step <= lambda/8 dividing every spacing
//! margin = 0.3                 # m added on both sides of the scene
//! absorber_fraction = 0.1      # per side; 0 disables the edge absorber
//!
//! [receiver]
//! # effective_area = 7.16e-7   # m^2; default lambda^2 / 4 pi
//! impedance = 376.73           # ohm
//! # noise_power = 1e-12        # W; default calibrated, see below
//! calibration_target = [0.1, 1.0]
//! calibration_snr_db = 20.0    # SNR of a focused beam at the target in free space
//!
//! [optimizer]
//! waist_wavelengths = 2.0      # Gaussian waist of the decay-region source / lambda
//! # offset_step = 3e-4         # m; default element spacing
//! # estimate_step = 1e-3       # m; default aperture / 200
//! clearance = 0.01             # m between obstacle corner and circumvention point
//! min_active = 8
//! # obstacle_point = [0.11, 0.6]  # default: picked for the configured user, kept for every depth
//!
//! [baselines]
//! ula_spacing_wavelengths = 0.5
//! # focus_target = [-0.2, 2.4] # default: the user
//!
//! [sweeps]
//! offset_c = { start = -0.2, stop = 0.4, step = 0.002 }
//! user_z = { start = 1.6, stop = 2.3, step = 0.175 }
//! spacings_wavelengths = [0.1, 0.2]
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub rhs: RhsSection,
    pub scene: SceneSection,
    pub propagation: PropagationSection,
    pub receiver: ReceiverSection,
    pub optimizer: OptimizerSection,
    pub baselines: BaselineSection,
    pub sweeps: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhsSection {
    pub frequency: f64,
    pub aperture_length: f64,
    pub spacing_wavelengths: f64,
    pub reference_index: f64,
    pub feed_power: f64,
    pub feed_position: f64,
}

impl Default for RhsSection {
    fn default() -> Self {
        Self {
            frequency: 100e9,
            aperture_length: 0.2,
            spacing_wavelengths: 0.1,
            reference_index: 2.0,
            feed_power: 1.0,
            feed_position: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub x: f64,
    pub z: f64,
    pub width: f64,
    pub depth: f64,
    #[serde(default)]
    pub attenuation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub user: [f64; 2],
    pub plane_spacing: f64,
    pub obstacles: Vec<ObstacleSpec>,
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            user: [-0.2, 2.4],
            plane_spacing: 0.005,
            obstacles: vec![ObstacleSpec {
                x: -0.1,
                z: 0.5,
                width: 0.2,
                depth: 0.1,
                attenuation: 0.0,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    pub margin: f64,
    pub absorber_fraction: f64,
}

impl Default for PropagationSection {
    fn default() -> Self {
        Self {
            dx: None,
            margin: 0.3,
            absorber_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_area: Option<f64>,
    pub impedance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power: Option<f64>,
    pub calibration_target: [f64; 2],
    pub calibration_snr_db: f64,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self {
            effective_area: None,
            impedance: holobeam::FREE_SPACE_IMPEDANCE,
            noise_power: None,
            calibration_target: [0.1, 1.0],
            calibration_snr_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub waist_wavelengths: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_step: Option<f64>,
    pub clearance: f64,
    pub min_active: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstacle_point: Option<[f64; 2]>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            waist_wavelengths: 2.0,
            offset_step: None,
            estimate_step: None,
            clearance: 0.01,
            min_active: holobeam::trajectory::DEFAULT_MIN_ACTIVE,
            obstacle_point: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub ula_spacing_wavelengths: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focus_target: Option<[f64; 2]>,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            ula_spacing_wavelengths: 0.5,
            focus_target: None,
        }
    }
}

/// Inclusive range `start, start + step, ...` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RangeSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let Self { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
            return Err(CliError::Config(format!(
                "empty or invalid range start={start} stop={stop} step={step}"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub offset_c: RangeSpec,
    pub user_z: RangeSpec,
    pub spacings_wavelengths: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            offset_c: RangeSpec {
                start: -0.2,
                stop: 0.4,
                step: 0.002,
            },
            user_z: RangeSpec {
                start: 1.6,
                stop: 2.3,
                step: 0.175,
            },
            spacings_wavelengths: vec![0.1, 0.2],
        }
    }
}

impl ScenarioConfig {
    /// Parses `text` after applying `key.path=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
    let value = parse_value(raw.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one element");
    let mut node = table;
    for key in parents {
        node = node
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}` in `{path}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(ScenarioConfig::from_toml("", &[]).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioConfig::from_toml("[rhs]\nfrequncy = 1e9\n", &[]).is_err());
        assert!(ScenarioConfig::from_toml("[bogus]\n", &[]).is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = ScenarioConfig::from_toml(
            "[rhs]\nfrequency = 50e9\n",
            &["rhs.spacing_wavelengths=0.2".into(), "scene.user=[0.0, 1.5]".into(), "optimizer.min_active = 4".into()],
        )
        .unwrap();
        assert_eq!(cfg.rhs.frequency, 50e9);
        assert_eq!(cfg.rhs.spacing_wavelengths, 0.2);
        assert_eq!(cfg.scene.user, [0.0, 1.5]);
        assert_eq!(cfg.optimizer.min_active, 4);
        assert!(ScenarioConfig::from_toml("", &["rhs.frequency".into()]).is_err());
        assert!(ScenarioConfig::from_toml("", &["rhs.frequency=fast".into()]).is_err());
    }

    #[test]
    fn round_trip_and_digest() {
        let cfg = ScenarioConfig::default();
        let again = ScenarioConfig::from_toml(&cfg.to_toml(), &[]).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.digest(), again.digest());
        let other = ScenarioConfig::from_toml("", &["rhs.feed_power=2.0".into()]).unwrap();
        assert_ne!(cfg.digest(), other.digest());
    }

    #[test]
    fn ranges() {
        let r = RangeSpec { start: 1.6, stop: 2.3, step: 0.175 };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[4] - 2.3).abs() < 1e-12);
        assert!(RangeSpec { start: 1.0, stop: 0.0, step: 0.1 }.values().is_err());
    }
}
