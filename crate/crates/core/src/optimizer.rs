//! Choice of the trajectory offset `c` for a receiver hidden behind an obstacle.
//!
//! Every offset fixes a parabola through the receiver and the circumvention
//! point. A cheap geometric score ranks the offsets and yields `c_est`; a local
//! search around `c_est` then evaluates the true received power on a grid of
//! step `delta_c`, marching in each direction while the power does not drop.

use std::f64::consts::PI;

use crate::beamformer::{ApertureExcitation, Transmitter};
use crate::error::{invalid, Error, Result};
use crate::propagation::Scene;
use crate::trajectory::{ObstaclePoint, Point, Trajectory, DEFAULT_MIN_ACTIVE};

/// Closed interval of admissible offsets, plus whether the whole aperture must
/// be active (needed by phase-only arrays to avoid distortion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetDomain {
    lo: f64,
    hi: f64,
    full_aperture: bool,
}

impl OffsetDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(invalid("offset_domain", format!("[{lo}, {hi}] is empty")));
        }
        Ok(Self {
            lo,
            hi,
            full_aperture: false,
        })
    }

    /// `0 <= c <= l`: the offset stays over the aperture.
    pub fn within_aperture(aperture_length: f64) -> Result<Self> {
        Self::new(0.0, aperture_length)
    }

    pub fn requiring_full_aperture(mut self) -> Self {
        self.full_aperture = true;
        self
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn needs_full_aperture(&self) -> bool {
        self.full_aperture
    }

    pub fn contains(&self, c: f64) -> bool {
        c >= self.lo - 1e-12 && c <= self.hi + 1e-12
    }

    /// `lo, lo + step, ...` up to `hi`.
    pub fn grid(&self, step: f64) -> Vec<f64> {
        let n = ((self.hi - self.lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * step).collect()
    }
}

/// Tunables of the estimator and the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Gaussian waist `Delta d` of the decay-region source, meters.
    pub waist: f64,
    /// Step `delta_c` of the local search, meters.
    pub offset_step: f64,
    /// Resolution of the `c_est` grid search, meters.
    pub estimate_step: f64,
    /// Clearance between the circumvention point and the obstacle, meters.
    pub clearance: f64,
    pub min_active: usize,
}

impl OptimizerSettings {
    /// `Delta d = 2 lambda`, `delta_c = d`, estimate step `l / 200`, 1 cm clearance.
    pub fn defaults_for(tx: &Transmitter) -> Self {
        Self {
            waist: 2.0 * tx.wavelength(),
            offset_step: tx.element_spacing(),
            estimate_step: tx.aperture_length() / 200.0,
            clearance: 0.01,
            min_active: DEFAULT_MIN_ACTIVE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("waist", self.waist),
            ("offset_step", self.offset_step),
            ("estimate_step", self.estimate_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.clearance.is_finite() && self.clearance >= 0.0) {
            return Err(invalid("clearance", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Geometric proxy for the received power at one offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricEstimate {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub z_max: f64,
    pub x_max: f64,
    /// Distance from the end of the caustic to the receiver.
    pub d_r: f64,
    /// Angle between the last tangent ray and the direction to the receiver.
    pub theta_r: f64,
    /// `(lambda / 4 pi d_r)^2 exp(-2 pi^2 waist^2 theta_r^2 / lambda^2)`.
    pub score: f64,
    pub waist: f64,
}

/// Trajectory for offset `c` if it is admissible for `tx` and `domain`.
pub fn admissible_trajectory(
    tx: &Transmitter,
    user: Point,
    obstacle: ObstaclePoint,
    c: f64,
    domain: &OffsetDomain,
    min_active: usize,
) -> Result<Trajectory> {
    if !domain.contains(c) {
        return Err(Error::InfeasibleOffset {
            c,
            reason: format!("outside [{}, {}]", domain.lo(), domain.hi()),
        });
    }
    let traj = Trajectory::through(user, obstacle, c)?;
    let check = tx.offset_check(&traj, min_active);
    if !check.feasible {
        return Err(Error::InfeasibleOffset {
            c,
            reason: format!("{} active elements, at least {min_active} required", check.active_count),
        });
    }
    if domain.needs_full_aperture() && !check.full_aperture() {
        return Err(Error::InfeasibleOffset {
            c,
            reason: "part of the aperture has no tangent ray".into(),
        });
    }
    Ok(traj)
}

/// Score of the parabola with offset `c`, without a feasibility check.
pub fn score_trajectory(traj: &Trajectory, tx: &Transmitter, user: Point, waist: f64) -> Result<GeometricEstimate> {
    let z_max = traj.z_max(tx.aperture_length())?;
    if z_max >= user.z {
        return Err(Error::EstimatorInvalid { z_max, z_user: user.z });
    }
    let x_max = traj.x_at(z_max);
    let slope = traj.slope_at(z_max);
    let (dx, dz) = (user.x - x_max, user.z - z_max);
    let d_r = dx.hypot(dz);
    let theta_r = ((dx - dz * slope) / (dz + slope * dx)).abs().atan();
    let lambda = tx.wavelength();
    let score = (lambda / (4.0 * PI * d_r)).powi(2) * (-2.0 * (PI * waist * theta_r / lambda).powi(2)).exp();
    Ok(GeometricEstimate {
        c: traj.c(),
        a: traj.a(),
        b: traj.b(),
        z_max,
        x_max,
        d_r,
        theta_r,
        score,
        waist,
    })
}

pub fn estimate_score(
    tx: &Transmitter,
    user: Point,
    obstacle: ObstaclePoint,
    c: f64,
    domain: &OffsetDomain,
    settings: &OptimizerSettings,
) -> Result<GeometricEstimate> {
    let traj = admissible_trajectory(tx, user, obstacle, c, domain, settings.min_active)?;
    score_trajectory(&traj, tx, user, settings.waist)
}

/// `argmax` of the geometric score on a grid of step `settings.estimate_step`.
pub fn estimate_offset(
    tx: &Transmitter,
    user: Point,
    obstacle: ObstaclePoint,
    domain: &OffsetDomain,
    settings: &OptimizerSettings,
) -> Result<GeometricEstimate> {
    settings.validate()?;
    domain
        .grid(settings.estimate_step)
        .into_iter()
        .filter_map(|c| estimate_score(tx, user, obstacle, c, domain, settings).ok())
        .fold(None, |best: Option<GeometricEstimate>, e| match best {
            Some(b) if b.score >= e.score => Some(b),
            _ => Some(e),
        })
        .ok_or(Error::NoFeasibleOffset {
            lo: domain.lo(),
            hi: domain.hi(),
        })
}

/// Outcome of the bidirectional march.
#[derive(Debug, Clone, PartialEq)]
pub struct HillClimb {
    pub start: f64,
    pub start_power: f64,
    pub best: f64,
    pub best_power: f64,
    /// Evaluated `(c, power)` pairs: the start, then the downward march, then
    /// the upward march.
    pub trace: Vec<(f64, f64)>,
    pub downward_evaluations: usize,
    pub upward_evaluations: usize,
}

/// From `start`, steps by `-step` while candidates are admissible and the
/// power does not decrease, then does the same with `+step`, and returns the
/// better of the two end points.
pub fn hill_climb<A, P>(start: f64, step: f64, mut admissible: A, mut power: P) -> Result<HillClimb>
where
    A: FnMut(f64) -> bool,
    P: FnMut(f64) -> Result<f64>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid("offset_step", "must be positive"));
    }
    if !admissible(start) {
        return Err(Error::InfeasibleOffset {
            c: start,
            reason: "search start is not admissible".into(),
        });
    }
    let start_power = power(start)?;
    let mut trace = vec![(start, start_power)];
    let mut ends = [(start, start_power); 2];
    let mut counts = [0usize; 2];
    for (dir, sign) in [-1.0, 1.0].into_iter().enumerate() {
        let (mut best_c, mut best_p) = (start, start_power);
        for i in 1.. {
            let c = start + sign * i as f64 * step;
            if !admissible(c) {
                break;
            }
            let p = power(c)?;
            trace.push((c, p));
            counts[dir] += 1;
            if p >= best_p {
                best_c = c;
                best_p = p;
            } else {
                break;
            }
        }
        ends[dir] = (best_c, best_p);
    }
    let (best, best_power) = if ends[1].1 > ends[0].1 { ends[1] } else { ends[0] };
    Ok(HillClimb {
        start,
        start_power,
        best,
        best_power,
        trace,
        downward_evaluations: counts[0],
        upward_evaluations: counts[1],
    })
}

/// One evaluated candidate of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// Geometric score, absent where its premise `z_max < z_r` fails.
    pub estimate: Option<GeometricEstimate>,
    pub power: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub estimate: GeometricEstimate,
    pub estimate_power: f64,
    pub c_opt: f64,
    pub power: f64,
    pub trajectory: Trajectory,
    pub excitation: ApertureExcitation,
    pub trace: Vec<TraceEntry>,
    pub downward_evaluations: usize,
    pub upward_evaluations: usize,
}

impl OptimizationResult {
    pub fn c_est(&self) -> f64 {
        self.estimate.c
    }
}

/// Estimate then local search. `power` maps an excitation to received power,
/// typically through a prepared propagation link.
pub fn optimize_trajectory<P>(
    tx: &Transmitter,
    user: Point,
    obstacle: ObstaclePoint,
    domain: &OffsetDomain,
    settings: &OptimizerSettings,
    mut power: P,
) -> Result<OptimizationResult>
where
    P: FnMut(&ApertureExcitation) -> Result<f64>,
{
    let estimate = estimate_offset(tx, user, obstacle, domain, settings)?;
    let mut entries = Vec::new();
    let climb = hill_climb(
        estimate.c,
        settings.offset_step,
        |c| admissible_trajectory(tx, user, obstacle, c, domain, settings.min_active).is_ok(),
        |c| {
            let traj = admissible_trajectory(tx, user, obstacle, c, domain, settings.min_active)?;
            let p = power(&tx.airy(&traj, settings.min_active)?)?;
            entries.push(TraceEntry {
                c,
                a: traj.a(),
                b: traj.b(),
                estimate: score_trajectory(&traj, tx, user, settings.waist).ok(),
                power: p,
            });
            Ok(p)
        },
    )?;
    let trajectory = admissible_trajectory(tx, user, obstacle, climb.best, domain, settings.min_active)?;
    Ok(OptimizationResult {
        estimate,
        estimate_power: climb.start_power,
        c_opt: climb.best,
        power: climb.best_power,
        excitation: tx.airy(&trajectory, settings.min_active)?,
        trajectory,
        trace: entries,
        downward_evaluations: climb.downward_evaluations,
        upward_evaluations: climb.upward_evaluations,
    })
}

/// Corner the curved beam should pass to reach a receiver whose line of
/// sight from every aperture point is blocked.
///
/// Among the obstacles the one cutting the most sampled rays is used. At its
/// far face the rays from the aperture ends span `[lo, hi]`; the side where the
/// obstacle sticks out least past that bundle is cheaper to go around (ties
/// go to negative x). The far corner on that side, pushed out by `clearance`,
/// is returned.
pub fn pick_circumvention_point(scene: &Scene, aperture_length: f64, clearance: f64) -> Result<ObstaclePoint> {
    if !scene.line_of_sight_blocked(aperture_length) {
        return Err(Error::NotBlocked);
    }
    let rx = scene.receiver();
    let samples = crate::propagation::LOS_SAMPLES;
    let obstacle = scene
        .obstacles()
        .iter()
        .fold(None, |best: Option<(usize, _)>, o| {
            let n = scene.rays_blocked_by(o, aperture_length, samples);
            match best {
                Some((m, _)) if m >= n => best,
                _ => Some((n, o)),
            }
        })
        .map(|(_, o)| *o)
        .ok_or(Error::NotBlocked)?;
    let z_far = obstacle.z_end();
    let ray_x = |x0: f64| x0 + (rx.x - x0) * z_far / rx.z;
    let (e0, e1) = (ray_x(0.0), ray_x(aperture_length));
    let (lo, hi) = (e0.min(e1), e0.max(e1));
    let left = lo - obstacle.x();
    let right = obstacle.x_end() - hi;
    if left <= right + 1e-12 {
        ObstaclePoint::new(obstacle.x() - clearance, z_far)
    } else {
        ObstaclePoint::new(obstacle.x_end() + clearance, z_far)
    }
}
