//! Experiments assembled from a [`ScenarioConfig`].
//!
//! One [`Experiment`] fixes the transmitters, the scene, a propagation grid
//! shared by every beam (so powers are comparable) and the receiver with its
//! noise floor. Sweeps fan out over a rayon pool and keep input order.

use holobeam::optimizer::{
    optimize_trajectory, pick_circumvention_point, score_trajectory, OptimizerSettings,
};
use holobeam::propagation::{achievable_rate, Obstacle, Propagation};
use holobeam::{
    GridSpec, Link, ObstaclePoint, OffsetDomain, OptimizationResult, Point, ReceiverModel, RhsConfig, Scene,
    Trajectory, Transmitter, UlaConfig, SPEED_OF_LIGHT,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};

/// Beam synthesized by a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamKind {
    /// Curved beam from the holographic surface.
    AiryRhs,
    /// Curved beam from the phase-only half-wavelength array.
    AiryUla,
    /// Holographic surface focused on the target point.
    Focused,
}

impl BeamKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::AiryRhs => "airy_rhs",
            Self::AiryUla => "airy_ula",
            Self::Focused => "focused",
        }
    }
}

/// One column of a beam comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamSpec {
    /// Optimized curved beam from a holographic surface at this spacing (in wavelengths).
    Rhs(f64),
    /// Optimized curved beam from the phase-only array.
    Ula,
    /// Focused holographic beam.
    Focused,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    config: ScenarioConfig,
    rhs: RhsConfig,
    ula: UlaConfig,
    scene: Scene,
    grid: GridSpec,
    receiver: ReceiverModel,
    /// Circumvention point shared by every receiver depth; `None` when the
    /// configured receiver has a line of sight.
    obstacle: Option<ObstaclePoint>,
}

/// Outcome of [`Experiment::run_single`].
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub kind: BeamKind,
    pub user: Point,
    pub trajectory: Option<Trajectory>,
    pub optimization: Option<OptimizationResult>,
    /// Every aperture position is covered by the trajectory.
    pub full_aperture: Option<bool>,
    pub power: f64,
    pub rate: f64,
    pub propagation: Propagation,
}

/// One offset of the offset sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetRow {
    pub c: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub z_max: Option<f64>,
    /// Geometric score of the offset, where its premise holds.
    pub score: Option<f64>,
    pub rhs_active: usize,
    pub rhs_power: Option<f64>,
    pub ula_full_aperture: bool,
    pub ula_power: Option<f64>,
}

/// One beam at one receiver depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamRow {
    pub z_r: f64,
    pub beam: String,
    pub spacing_wavelengths: f64,
    pub c_est: Option<f64>,
    pub c_opt: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub z_max: Option<f64>,
    pub x_max: Option<f64>,
    pub d_r: Option<f64>,
    pub theta_r: Option<f64>,
    pub power: f64,
    pub power_dbw: f64,
    pub rate: f64,
    pub evaluations: usize,
}

impl Experiment {
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        let r = &config.rhs;
        if !(r.frequency.is_finite() && r.frequency > 0.0) {
            return Err(CliError::Config(format!("rhs.frequency must be positive, got {}", r.frequency)));
        }
        let lambda = SPEED_OF_LIGHT / r.frequency;
        let rhs = RhsConfig::spanning(r.aperture_length, r.spacing_wavelengths * lambda, r.frequency, r.feed_power)?
            .with_reference_index(r.reference_index)?
            .with_feed_position(r.feed_position)?;
        let ula = UlaConfig::spanning(
            r.aperture_length,
            config.baselines.ula_spacing_wavelengths * lambda,
            r.frequency,
            r.feed_power,
        )?;
        let obstacles = config
            .scene
            .obstacles
            .iter()
            .map(|o| Obstacle::new(o.x, o.z, o.width, o.depth, o.attenuation))
            .collect::<holobeam::Result<Vec<_>>>()?;
        let [ux, uz] = config.scene.user;
        let scene = Scene::new(obstacles, Point::new(ux, uz), config.scene.plane_spacing)?;

        let p = &config.propagation;
        if !(p.margin.is_finite() && p.margin >= 0.0) {
            return Err(CliError::Config("propagation.margin must be nonnegative".into()));
        }
        if !(0.0..0.5).contains(&p.absorber_fraction) {
            return Err(CliError::Config("propagation.absorber_fraction must lie in [0, 0.5)".into()));
        }
        for &s in &config.sweeps.spacings_wavelengths {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Config(format!("sweeps.spacings_wavelengths entry {s} is not positive")));
            }
        }
        let dx = match p.dx {
            Some(dx) => dx,
            None => {
                let mut spacings = vec![rhs.element_spacing(), ula.element_spacing()];
                spacings.extend(config.sweeps.spacings_wavelengths.iter().map(|s| s * lambda));
                GridSpec::default_step(lambda, &spacings)
            }
        };
        let (mut lo, mut hi) = scene.x_extent();
        lo = lo.min(0.0).min(r.feed_position);
        hi = hi.max(r.aperture_length).max(r.feed_position);
        let targets = [Some(config.receiver.calibration_target), config.baselines.focus_target];
        for [x, _] in targets.into_iter().flatten() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let grid = GridSpec::covering(lo - p.margin, hi + p.margin, dx)?;

        let rc = &config.receiver;
        let area = rc
            .effective_area
            .unwrap_or(lambda * lambda / (4.0 * std::f64::consts::PI));
        let obstacle = match config.optimizer.obstacle_point {
            Some([x, z]) => Some(ObstaclePoint::new(x, z)?),
            None => match pick_circumvention_point(&scene, r.aperture_length, config.optimizer.clearance) {
                Ok(p) => Some(p),
                Err(holobeam::Error::NotBlocked) => None,
                Err(e) => return Err(e.into()),
            },
        };
        let mut exp = Self {
            receiver: ReceiverModel::new(area, rc.impedance, rc.noise_power.unwrap_or(1.0))?,
            obstacle,
            config,
            rhs,
            ula,
            scene,
            grid,
        };
        if exp.config.receiver.noise_power.is_none() {
            let noise = exp.calibrated_noise()?;
            exp.receiver = exp.receiver.with_noise_power(noise)?;
        }
        Ok(exp)
    }

    /// Noise power that gives the configured SNR for a focused beam at the
    /// calibration target in free space.
    fn calibrated_noise(&self) -> Result<f64> {
        let rc = &self.config.receiver;
        let [x, z] = rc.calibration_target;
        let target = Point::new(x, z);
        let scene = Scene::free_space(target, self.scene.plane_spacing())?;
        let link = self.link(&scene)?;
        let p = link.received_power(&holobeam::beamformer::focused_rhs(&self.rhs, target)?, &self.receiver)?;
        let noise = p / 10f64.powf(rc.calibration_snr_db / 10.0);
        if !(noise.is_finite() && noise > 0.0) {
            return Err(CliError::Config(format!(
                "noise calibration produced {noise}; set receiver.noise_power explicitly"
            )));
        }
        Ok(noise)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn rhs(&self) -> &RhsConfig {
        &self.rhs
    }

    pub fn ula(&self) -> &UlaConfig {
        &self.ula
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn receiver(&self) -> &ReceiverModel {
        &self.receiver
    }

    pub fn wavelength(&self) -> f64 {
        self.rhs.wavelength()
    }

    pub fn user(&self) -> Point {
        self.scene.receiver()
    }

    /// Holographic surface over the configured aperture at another spacing.
    pub fn rhs_at(&self, spacing_wavelengths: f64) -> Result<RhsConfig> {
        let r = &self.config.rhs;
        Ok(RhsConfig::spanning(
            r.aperture_length,
            spacing_wavelengths * self.wavelength(),
            r.frequency,
            r.feed_power,
        )?
        .with_reference_index(r.reference_index)?
        .with_feed_position(r.feed_position)?)
    }

    pub fn transmitter(&self, kind: BeamKind) -> Transmitter {
        match kind {
            BeamKind::AiryRhs | BeamKind::Focused => Transmitter::Rhs(self.rhs.clone()),
            BeamKind::AiryUla => Transmitter::Ula(self.ula.clone()),
        }
    }

    pub fn settings_for(&self, tx: &Transmitter) -> Result<OptimizerSettings> {
        let o = &self.config.optimizer;
        let mut s = OptimizerSettings::defaults_for(tx);
        s.waist = o.waist_wavelengths * tx.wavelength();
        s.offset_step = o.offset_step.unwrap_or(s.offset_step);
        s.estimate_step = o.estimate_step.unwrap_or(s.estimate_step);
        s.clearance = o.clearance;
        s.min_active = o.min_active;
        s.validate()?;
        Ok(s)
    }

    /// `[0, l]` for the holographic surface; `[-l, 2l]` with the whole
    /// aperture active for the phase-only array.
    pub fn domain_for(&self, tx: &Transmitter) -> Result<OffsetDomain> {
        let l = tx.aperture_length();
        Ok(match tx {
            Transmitter::Rhs(_) => OffsetDomain::within_aperture(l)?,
            Transmitter::Ula(_) => OffsetDomain::new(-l, 2.0 * l)?.requiring_full_aperture(),
        })
    }

    /// Configured obstacles with the receiver at `user`.
    pub fn scene_at(&self, user: Point) -> Result<Scene> {
        Ok(self.scene.with_receiver(user)?)
    }

    pub fn link(&self, scene: &Scene) -> Result<Link> {
        Ok(Link::new(
            scene,
            self.grid,
            self.rhs.wavenumber(),
            self.config.propagation.absorber_fraction,
        )?)
    }

    /// Configured circumvention point, or the one picked for the configured
    /// receiver. It belongs to the scene, so depth sweeps keep it fixed.
    pub fn obstacle_point(&self) -> Result<ObstaclePoint> {
        self.obstacle.ok_or(CliError::Model(holobeam::Error::NotBlocked))
    }

    pub fn optimize(&self, tx: &Transmitter, link: &Link) -> Result<OptimizationResult> {
        let scene = link.scene();
        let obstacle = self.obstacle_point()?;
        let domain = self.domain_for(tx)?;
        let settings = self.settings_for(tx)?;
        Ok(optimize_trajectory(
            tx,
            scene.receiver(),
            obstacle,
            &domain,
            &settings,
            |exc| link.received_power(exc, &self.receiver),
        )?)
    }

    pub fn rate(&self, power: f64) -> f64 {
        achievable_rate(power, &self.receiver)
    }

    /// Synthesizes and propagates one beam to the configured user.
    ///
    /// Curved beams use `offset` when given (an inadmissible holographic
    /// offset is an error, a phase-only one is allowed to distort) and the
    /// optimizer otherwise.
    pub fn run_single(&self, kind: BeamKind, offset: Option<f64>, retain: bool) -> Result<SingleRun> {
        let user = self.user();
        let link = self.link(&self.scene)?;
        let tx = self.transmitter(kind);
        let min_active = self.config.optimizer.min_active;
        let (exc, trajectory, optimization) = match (kind, offset) {
            (BeamKind::Focused, _) => {
                let target = self
                    .config
                    .baselines
                    .focus_target
                    .map_or(user, |[x, z]| Point::new(x, z));
                (tx.focused(target)?, None, None)
            }
            (_, Some(c)) => {
                let traj = Trajectory::through(user, self.obstacle_point()?, c)?;
                (tx.airy(&traj, min_active)?, Some(traj), None)
            }
            (_, None) => {
                let opt = self.optimize(&tx, &link)?;
                (opt.excitation.clone(), Some(opt.trajectory), Some(opt))
            }
        };
        let full_aperture = trajectory.map(|t| tx.offset_check(&t, min_active).full_aperture());
        let propagation = link.run(&exc, retain)?;
        let power = self
            .receiver
            .power_from_field(propagation.final_slice.value_at(user.x)?.norm_sqr());
        Ok(SingleRun {
            kind,
            user,
            trajectory,
            optimization,
            full_aperture,
            power,
            rate: self.rate(power),
            propagation,
        })
    }

    /// Received power of both curved beams for every configured offset `c`.
    pub fn offset_sweep(&self, workers: usize) -> Result<Vec<OffsetRow>> {
        let offsets = self.config.sweeps.offset_c.values()?;
        let link = self.link(&self.scene)?;
        let obstacle = self.obstacle_point()?;
        let rhs = Transmitter::Rhs(self.rhs.clone());
        let ula = Transmitter::Ula(self.ula.clone());
        let min_active = self.config.optimizer.min_active;
        let waist = self.settings_for(&rhs)?.waist;
        let user = self.user();
        parallel_map(workers, &offsets, |&c| {
            let Ok(traj) = Trajectory::through(user, obstacle, c) else {
                return Ok(OffsetRow {
                    c,
                    a: None,
                    b: None,
                    z_max: None,
                    score: None,
                    rhs_active: 0,
                    rhs_power: None,
                    ula_full_aperture: false,
                    ula_power: None,
                });
            };
            let rhs_check = rhs.offset_check(&traj, min_active);
            let rhs_power = if rhs_check.feasible {
                Some(link.received_power(&rhs.airy(&traj, min_active)?, &self.receiver)?)
            } else {
                None
            };
            let ula_power = link.received_power(&ula.airy(&traj, min_active)?, &self.receiver)?;
            Ok(OffsetRow {
                c,
                a: Some(traj.a()),
                b: Some(traj.b()),
                z_max: traj.z_max(rhs.aperture_length()).ok(),
                score: score_trajectory(&traj, &rhs, user, waist).ok().map(|e| e.score),
                rhs_active: rhs_check.active_count,
                rhs_power,
                ula_full_aperture: ula.offset_check(&traj, min_active).full_aperture(),
                ula_power: Some(ula_power),
            })
        })
    }

    /// Holographic surface at every sweep spacing, then the phase-only array,
    /// then the focused beam.
    pub fn default_beams(&self) -> Vec<BeamSpec> {
        let mut beams: Vec<BeamSpec> = self
            .config
            .sweeps
            .spacings_wavelengths
            .iter()
            .map(|&s| BeamSpec::Rhs(s))
            .collect();
        beams.push(BeamSpec::Ula);
        beams.push(BeamSpec::Focused);
        beams
    }

    /// Every beam in `beams` at every receiver depth, row order depth-major.
    pub fn compare_beams(&self, depths: &[f64], beams: &[BeamSpec], workers: usize) -> Result<Vec<BeamRow>> {
        let tasks: Vec<(f64, BeamSpec)> = depths
            .iter()
            .flat_map(|&z| beams.iter().map(move |&b| (z, b)))
            .collect();
        parallel_map(workers, &tasks, |&(z, beam)| self.beam_row(z, beam))
    }

    /// Beam comparison over the configured receiver depths.
    pub fn user_sweep(&self, workers: usize) -> Result<Vec<BeamRow>> {
        let depths = self.config.sweeps.user_z.values()?;
        self.compare_beams(&depths, &self.default_beams(), workers)
    }

    /// Beam comparison at the configured receiver.
    pub fn spacing_sweep(&self, workers: usize) -> Result<Vec<BeamRow>> {
        self.compare_beams(&[self.user().z], &self.default_beams(), workers)
    }

    fn beam_row(&self, z_r: f64, beam: BeamSpec) -> Result<BeamRow> {
        let user = Point::new(self.user().x, z_r);
        let link = self.link(&self.scene_at(user)?)?;
        let (name, spacing, tx) = match beam {
            BeamSpec::Rhs(s) => ("airy_rhs", s, Transmitter::Rhs(self.rhs_at(s)?)),
            BeamSpec::Ula => (
                "airy_ula",
                self.config.baselines.ula_spacing_wavelengths,
                Transmitter::Ula(self.ula.clone()),
            ),
            BeamSpec::Focused => (
                "focused",
                self.config.rhs.spacing_wavelengths,
                Transmitter::Rhs(self.rhs.clone()),
            ),
        };
        let mut row = BeamRow {
            z_r,
            beam: name.into(),
            spacing_wavelengths: spacing,
            c_est: None,
            c_opt: None,
            a: None,
            b: None,
            z_max: None,
            x_max: None,
            d_r: None,
            theta_r: None,
            power: 0.0,
            power_dbw: f64::NEG_INFINITY,
            rate: 0.0,
            evaluations: 1,
        };
        if let BeamSpec::Focused = beam {
            row.power = link.received_power(&tx.focused(user)?, &self.receiver)?;
        } else {
            let opt = self.optimize(&tx, &link)?;
            let settings = self.settings_for(&tx)?;
            let at_opt = score_trajectory(&opt.trajectory, &tx, user, settings.waist).ok();
            row.c_est = Some(opt.c_est());
            row.c_opt = Some(opt.c_opt);
            row.a = Some(opt.trajectory.a());
            row.b = Some(opt.trajectory.b());
            row.z_max = opt.trajectory.z_max(tx.aperture_length()).ok();
            row.x_max = at_opt.map(|e| e.x_max);
            row.d_r = at_opt.map(|e| e.d_r);
            row.theta_r = at_opt.map(|e| e.theta_r);
            row.power = opt.power;
            row.evaluations = opt.trace.len();
        }
        row.power_dbw = 10.0 * row.power.log10();
        row.rate = self.rate(row.power);
        Ok(row)
    }
}

/// Summary of an offset sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetSummary {
    /// Best holographic power with `0 <= c <= l`, as `(c, power)`.
    pub best_rhs: Option<(f64, f64)>,
    /// Best phase-only power where the whole aperture is active.
    pub best_ula: Option<(f64, f64)>,
    /// Best phase-only power at any offset, distorted ones included.
    pub best_ula_any: Option<(f64, f64)>,
    /// `best_rhs / best_ula` in dB.
    pub margin_db: Option<f64>,
    /// Largest `|10 log10(P_rhs / P_ula)|` where both beams are defined and
    /// `c` lies outside `(0, l)`.
    pub outside_gap_db: Option<f64>,
    pub outside_compared: usize,
}

impl OffsetSummary {
    pub fn of(rows: &[OffsetRow], aperture_length: f64) -> Self {
        const TOL: f64 = 1e-12;
        let best = |it: &mut dyn Iterator<Item = (f64, f64)>| {
            it.fold(None, |b: Option<(f64, f64)>, (c, p)| match b {
                Some((_, bp)) if bp >= p => b,
                _ => Some((c, p)),
            })
        };
        let best_rhs = best(&mut rows.iter().filter_map(|r| {
            let inside = r.c >= -TOL && r.c <= aperture_length + TOL;
            r.rhs_power.filter(|_| inside).map(|p| (r.c, p))
        }));
        let best_ula = best(&mut rows
            .iter()
            .filter(|r| r.ula_full_aperture)
            .filter_map(|r| r.ula_power.map(|p| (r.c, p))));
        let best_ula_any = best(&mut rows.iter().filter_map(|r| r.ula_power.map(|p| (r.c, p))));
        let gaps: Vec<f64> = rows
            .iter()
            .filter(|r| r.c <= TOL || r.c >= aperture_length - TOL)
            .filter_map(|r| Some(db(r.rhs_power? / r.ula_power?).abs()))
            .collect();
        Self {
            best_rhs,
            best_ula,
            best_ula_any,
            margin_db: best_rhs.zip(best_ula).map(|((_, r), (_, u))| db(r / u)),
            outside_gap_db: gaps.iter().copied().reduce(f64::max),
            outside_compared: gaps.len(),
        }
    }
}

pub fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Maps `items` on a pool of `workers` threads (0 means one per core),
/// preserving order.
pub fn parallel_map<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}
