//! Scalar propagation in the (x, z) plane.
//!
//! The aperture excitation is deposited on a uniform x-grid at z = 0 and
//! advanced plane by plane with the angular-spectrum method. After each step
//! the blockage mask of the new plane is applied, followed by an optional
//! raised-cosine absorber at the window edges that suppresses FFT wraparound.

mod asm;
pub mod export;
mod grid;
mod receiver;
mod rs;
mod scene;

pub use asm::{absorber_profile, asm_step, AngularSpectrum, BlockageMask};
pub use grid::{FieldSlice, GridSpec};
pub use receiver::{achievable_rate, received_power, ReceiverModel};
pub use rs::{bessel_j0, bessel_j1, bessel_y0, bessel_y1, rs_direct, RsKernel};
pub use scene::{Obstacle, Scene, GEOMETRY_TOLERANCE, LOS_SAMPLES};

use num_complex::Complex64;

use crate::beamformer::ApertureExcitation;
use crate::error::{Error, Result};

/// Default fraction of the window (per side) covered by the absorber.
pub const DEFAULT_ABSORBER_FRACTION: f64 = 0.1;

/// Places each element weight on its nearest grid sample.
pub fn excitation_to_slice(exc: &ApertureExcitation, grid: &GridSpec) -> Result<FieldSlice> {
    let mut sorted = exc.positions().to_vec();
    sorted.sort_by(f64::total_cmp);
    let spacing = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if spacing < grid.dx() * (1.0 - 1e-9) {
        return Err(Error::GridTooCoarse {
            dx: grid.dx(),
            spacing,
        });
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.count()];
    let mut used = vec![false; grid.count()];
    for (&x, &w) in exc.positions().iter().zip(exc.weights()) {
        let i = grid.nearest_index(x)?;
        if used[i] {
            return Err(Error::GridTooCoarse {
                dx: grid.dx(),
                spacing,
            });
        }
        used[i] = true;
        values[i] = w;
    }
    FieldSlice::new(0.0, *grid, values)
}

/// A scene prepared for repeated propagation on one grid.
#[derive(Debug, Clone)]
pub struct Link {
    scene: Scene,
    spectrum: AngularSpectrum,
    masks: Vec<BlockageMask>,
    absorber: Option<Vec<f64>>,
}

/// Result of [`Link::run`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub final_slice: FieldSlice,
    /// `|E|^2` of every plane from z = 0 to the receiver plane, if retained.
    pub intensity: Option<Vec<Vec<f64>>>,
}

impl Link {
    /// `absorber_fraction = 0` disables the edge absorber.
    pub fn new(scene: &Scene, grid: GridSpec, wavenumber: f64, absorber_fraction: f64) -> Result<Self> {
        let spectrum = AngularSpectrum::new(grid, wavenumber, scene.plane_spacing())?;
        let absorber = (absorber_fraction > 0.0).then(|| absorber_profile(grid.count(), absorber_fraction));
        let link = Self {
            scene: scene.clone(),
            masks: scene.masks(&grid),
            spectrum,
            absorber,
        };
        // catches a receiver outside the window before any propagation
        FieldSlice::zeros(0.0, grid).value_at(scene.receiver().x)?;
        Ok(link)
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn grid(&self) -> &GridSpec {
        self.spectrum.grid()
    }

    pub fn spectrum(&self) -> &AngularSpectrum {
        &self.spectrum
    }

    pub fn plane_count(&self) -> usize {
        self.masks.len()
    }

    pub fn run(&self, exc: &ApertureExcitation, retain: bool) -> Result<Propagation> {
        let initial = excitation_to_slice(exc, self.grid())?;
        self.run_slice(initial, retain)
    }

    pub fn run_slice(&self, initial: FieldSlice, retain: bool) -> Result<Propagation> {
        let grid = *self.grid();
        let mut values = initial.into_values();
        let mut rows = retain.then(|| vec![values.iter().map(|v| v.norm_sqr()).collect::<Vec<f64>>()]);
        let mut scratch = self.spectrum.scratch();
        for mask in &self.masks {
            self.spectrum.advance(&mut values, &mut scratch);
            mask.apply(&mut values);
            if let Some(w) = &self.absorber {
                for (v, a) in values.iter_mut().zip(w) {
                    *v *= a;
                }
            }
            if let Some(rows) = rows.as_mut() {
                rows.push(values.iter().map(|v| v.norm_sqr()).collect());
            }
        }
        let z = self.scene.plane_z(self.plane_count());
        Ok(Propagation {
            final_slice: FieldSlice::new(z, grid, values)?,
            intensity: rows,
        })
    }

    /// Complex field at the receiver.
    pub fn received_field(&self, exc: &ApertureExcitation) -> Result<Complex64> {
        self.run(exc, false)?
            .final_slice
            .value_at(self.scene.receiver().x)
    }

    pub fn received_power(&self, exc: &ApertureExcitation, rx: &ReceiverModel) -> Result<f64> {
        Ok(rx.power_from_field(self.received_field(exc)?.norm_sqr()))
    }
}

/// One-shot propagation of `exc` through `scene` on `grid`.
pub fn propagate(
    exc: &ApertureExcitation,
    scene: &Scene,
    grid: GridSpec,
    wavenumber: f64,
    absorber_fraction: f64,
    retain: bool,
) -> Result<Propagation> {
    Link::new(scene, grid, wavenumber, absorber_fraction)?.run(exc, retain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Point;
    use proptest::prelude::*;

    const LAMBDA: f64 = 0.003;

    fn k() -> f64 {
        2.0 * std::f64::consts::PI / LAMBDA
    }

    fn exc(positions: Vec<f64>, weights: Vec<Complex64>) -> ApertureExcitation {
        let p: f64 = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().max(1e-300);
        ApertureExcitation::new(positions, weights, p).unwrap()
    }

    #[test]
    fn deposit_single_and_collision() {
        let g = GridSpec::covering(-0.01, 0.01, LAMBDA / 8.0).unwrap();
        let e = exc(vec![0.0], vec![Complex64::new(0.3, 0.4)]);
        let s = excitation_to_slice(&e, &g).unwrap();
        assert_eq!(s.energy(), 0.25);
        assert_eq!(s.values().iter().filter(|v| v.norm() > 0.0).count(), 1);

        let close = exc(vec![0.0, LAMBDA / 16.0], vec![Complex64::new(1.0, 0.0); 2]);
        assert!(matches!(excitation_to_slice(&close, &g), Err(Error::GridTooCoarse { .. })));
        let far = exc(vec![1.0], vec![Complex64::new(1.0, 0.0)]);
        assert!(matches!(excitation_to_slice(&far, &g), Err(Error::OutsideGrid { .. })));
    }

    #[test]
    fn deposit_reference_aperture() {
        let d = LAMBDA / 10.0;
        let n = 668;
        let positions: Vec<f64> = (0..n).map(|i| i as f64 * d).collect();
        let weights: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0 / (n as f64).sqrt() * (0.5 + 0.5 * (i as f64).sin().abs()), i as f64))
            .collect();
        let e = exc(positions, weights);
        let g = GridSpec::covering(-0.5, 0.5, d).unwrap();
        assert_eq!(g.count(), 4096);
        let s = excitation_to_slice(&e, &g).unwrap();
        assert!((s.energy() - e.radiated_power()).abs() < 1e-15);
    }

    #[test]
    fn total_blockage_zeroes_downstream() {
        let g = GridSpec::covering(-0.2, 0.2, LAMBDA / 8.0).unwrap();
        let wall = Obstacle::opaque(g.start() - 1.0, 0.1, g.end() - g.start() + 2.0, 0.004).unwrap();
        let scene = Scene::new(vec![wall], Point::new(0.0, 0.3), 0.005).unwrap();
        let e = exc(vec![0.0, 0.01], vec![Complex64::new(1.0, 0.0); 2]);
        let out = propagate(&e, &scene, g, k(), 0.0, true).unwrap();
        let rows = out.intensity.unwrap();
        assert_eq!(rows.len(), 61);
        assert!(rows[19].iter().any(|&v| v > 0.0));
        for row in &rows[20..] {
            assert!(row.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn free_space_energy_over_many_steps() {
        let g = GridSpec::covering(-0.1, 0.1, LAMBDA / 8.0).unwrap();
        let scene = Scene::free_space(Point::new(0.0, 0.5), 0.005).unwrap();
        let link = Link::new(&scene, g, k(), 0.0).unwrap();
        let values: Vec<Complex64> = g
            .positions()
            .iter()
            .map(|&x| Complex64::from_polar((-(x / 0.01).powi(2)).exp(), 300.0 * x))
            .collect();
        let initial = FieldSlice::new(0.0, g, values).unwrap();
        let before = link.spectrum().band_limited_energy(initial.values());
        let out = link.run_slice(initial, false).unwrap();
        assert_eq!(link.plane_count(), 100);
        assert!(((out.final_slice.energy() - before) / before).abs() < 1e-6);
    }

    #[test]
    fn attenuation_scales_downstream_field() {
        let g = GridSpec::covering(-0.2, 0.2, LAMBDA / 8.0).unwrap();
        let e = exc(vec![0.0, 0.003, 0.006], vec![Complex64::new(0.5, 0.0); 3]);
        let field = |alpha: f64| {
            let wall = Obstacle::new(g.start() - 1.0, 0.1, 3.0, 0.001, alpha).unwrap();
            let scene = Scene::new(vec![wall], Point::new(0.0, 0.3), 0.005).unwrap();
            propagate(&e, &scene, g, k(), 0.1, false).unwrap().final_slice
        };
        let reference = field(0.0);
        assert!(reference.values().iter().all(|v| v.norm() == 0.0));
        let mut previous = reference;
        for alpha in [0.2, 0.5, 0.9] {
            let next = field(alpha);
            for (a, b) in previous.values().iter().zip(next.values()) {
                assert!(b.norm() >= a.norm());
            }
            previous = next;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn propagation_is_linear(re in prop::collection::vec(-1.0f64..1.0, 6), im in prop::collection::vec(-1.0f64..1.0, 6), s in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0]) {
            let g = GridSpec::covering(-0.15, 0.15, LAMBDA / 8.0).unwrap();
            let obstacle = Obstacle::opaque(-0.02, 0.05, 0.03, 0.01).unwrap();
            let scene = Scene::new(vec![obstacle], Point::new(0.01, 0.2), 0.005).unwrap();
            let link = Link::new(&scene, g, k(), 0.1).unwrap();
            let positions: Vec<f64> = (0..6).map(|i| i as f64 * 0.002).collect();
            let weights: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            prop_assume!(weights.iter().any(|w| w.norm() > 1e-3));
            let e = exc(positions, weights);
            let base = link.run(&e, false).unwrap().final_slice;
            let scaled = link.run(&e.scaled(s).unwrap(), false).unwrap().final_slice;
            let norm = base.energy().sqrt();
            for (a, b) in base.values().iter().zip(scaled.values()) {
                prop_assert!((a * s - b).norm() <= 1e-12 * norm.max(1e-300) * 10.0);
            }
        }
    }
}
