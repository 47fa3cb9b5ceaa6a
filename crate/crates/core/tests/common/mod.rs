#![allow(dead_code)]

use holobeam::propagation::{Obstacle, Scene};
use holobeam::{RhsConfig, SPEED_OF_LIGHT};
use holobeam::trajectory::Point;

pub const FREQUENCY: f64 = 100e9;

pub fn wavelength() -> f64 {
    SPEED_OF_LIGHT / FREQUENCY
}

pub fn wavenumber() -> f64 {
    2.0 * std::f64::consts::PI / wavelength()
}

/// 0.2 m aperture at lambda/10, unit feed power.
pub fn rhs() -> RhsConfig {
    RhsConfig::spanning(0.2, wavelength() / 10.0, FREQUENCY, 1.0).unwrap()
}

/// Opaque block [-0.1, 0.1] x [0.5, 0.6].
pub fn blocked_scene(receiver: Point) -> Scene {
    Scene::new(
        vec![Obstacle::opaque(-0.1, 0.5, 0.2, 0.1).unwrap()],
        receiver,
        0.005,
    )
    .unwrap()
}
