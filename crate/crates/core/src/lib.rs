//! Curved-beam synthesis on an amplitude-controlled holographic surface.
//!
//! The crate is organised bottom-up:
//!
//! * [`rhs_model`] - per-element radiation of the holographic surface, in both
//!   the sequential radiation-ratio form and the equivalent amplitude form.
//! * [`trajectory`] - parabolic trajectories, the caustic phase profile and the
//!   tangent-ray geometry behind it.
//! * [`beamformer`] - aperture excitations: holographic Airy, phase-only ULA
//!   Airy and near-field focusing baselines.
//! * [`propagation`] - scalar field propagation (angular spectrum stepping with
//!   blockage masks and a direct Rayleigh-Sommerfeld reference), received power.
//! * [`optimizer`] - geometric power estimate, offset estimate and the
//!   bidirectional local search over the trajectory offset.
//!
//! Lengths are in meters, phases in radians, powers in watts.

pub mod beamformer;
pub mod error;
pub mod optimizer;
pub mod propagation;
pub mod rhs_model;
pub mod trajectory;

pub use beamformer::{ApertureExcitation, Transmitter, UlaConfig};
pub use error::{Error, Result};
pub use optimizer::{GeometricEstimate, OffsetDomain, OptimizationResult};
pub use propagation::{FieldSlice, GridSpec, Link, Obstacle, ReceiverModel, Scene};
pub use rhs_model::RhsConfig;
pub use trajectory::{ObstaclePoint, Point, Trajectory};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wave impedance, ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730;
