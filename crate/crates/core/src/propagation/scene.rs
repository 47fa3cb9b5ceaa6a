use super::asm::BlockageMask;
use super::grid::GridSpec;
use crate::error::{invalid, Result};
use crate::trajectory::Point;

/// Geometric tolerance for plane occupancy and ray-rectangle tests, meters.
pub const GEOMETRY_TOLERANCE: f64 = 1e-9;

/// Axis-aligned rectangle `[x, x + width] x [z, z + depth]` that multiplies
/// the field inside it by `attenuation` at every plane it spans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    x: f64,
    z: f64,
    width: f64,
    depth: f64,
    attenuation: f64,
}

impl Obstacle {
    pub fn new(x: f64, z: f64, width: f64, depth: f64, attenuation: f64) -> Result<Self> {
        if !(x.is_finite() && z.is_finite()) {
            return Err(invalid("obstacle.vertex", "must be finite"));
        }
        if !(width.is_finite() && width > 0.0 && depth.is_finite() && depth > 0.0) {
            return Err(invalid("obstacle.extent", "width and depth must be positive"));
        }
        if !(0.0..1.0).contains(&attenuation) {
            return Err(invalid("obstacle.attenuation", format!("{attenuation} is outside [0, 1)")));
        }
        Ok(Self {
            x,
            z,
            width,
            depth,
            attenuation,
        })
    }

    /// Fully absorbing rectangle.
    pub fn opaque(x: f64, z: f64, width: f64, depth: f64) -> Result<Self> {
        Self::new(x, z, width, depth, 0.0)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    pub fn x_end(&self) -> f64 {
        self.x + self.width
    }

    pub fn z_end(&self) -> f64 {
        self.z + self.depth
    }

    pub fn spans_plane(&self, z: f64) -> bool {
        z >= self.z - GEOMETRY_TOLERANCE && z <= self.z_end() + GEOMETRY_TOLERANCE
    }

    /// Whether the segment `p`-`q` touches the rectangle (Liang-Barsky clip).
    pub fn intersects_segment(&self, p: Point, q: Point) -> bool {
        let tol = GEOMETRY_TOLERANCE;
        let (dx, dz) = (q.x - p.x, q.z - p.z);
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        let edges = [
            (-dx, p.x - (self.x - tol)),
            (dx, self.x_end() + tol - p.x),
            (-dz, p.z - (self.z - tol)),
            (dz, self.z_end() + tol - p.z),
        ];
        for (num, gap) in edges {
            if num == 0.0 {
                if gap < 0.0 {
                    return false;
                }
            } else {
                let t = gap / num;
                if num < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Obstacles, receiver and the propagation plane spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    obstacles: Vec<Obstacle>,
    receiver: Point,
    plane_spacing: f64,
}

impl Scene {
    pub const DEFAULT_PLANE_SPACING: f64 = 0.005;

    pub fn new(obstacles: Vec<Obstacle>, receiver: Point, plane_spacing: f64) -> Result<Self> {
        if !(receiver.z.is_finite() && receiver.z > 0.0 && receiver.x.is_finite()) {
            return Err(invalid("receiver", "needs finite x and z > 0"));
        }
        if !(plane_spacing.is_finite() && plane_spacing > 0.0) {
            return Err(invalid("plane_spacing", format!("must be positive, got {plane_spacing}")));
        }
        if (receiver.z / plane_spacing).round() < 1.0 {
            return Err(invalid("plane_spacing", "receiver is closer than half a plane"));
        }
        Ok(Self {
            obstacles,
            receiver,
            plane_spacing,
        })
    }

    pub fn free_space(receiver: Point, plane_spacing: f64) -> Result<Self> {
        Self::new(Vec::new(), receiver, plane_spacing)
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn receiver(&self) -> Point {
        self.receiver
    }

    pub fn plane_spacing(&self) -> f64 {
        self.plane_spacing
    }

    /// Same obstacles with the receiver moved.
    pub fn with_receiver(&self, receiver: Point) -> Result<Self> {
        Self::new(self.obstacles.clone(), receiver, self.plane_spacing)
    }

    /// `S = round(z_r / dz)`.
    pub fn plane_count(&self) -> usize {
        (self.receiver.z / self.plane_spacing).round() as usize
    }

    /// Depth of plane `s`, 1-based.
    pub fn plane_z(&self, s: usize) -> f64 {
        s as f64 * self.plane_spacing
    }

    /// x-extent of everything placed in the scene, receiver included.
    pub fn x_extent(&self) -> (f64, f64) {
        self.obstacles.iter().fold(
            (self.receiver.x, self.receiver.x),
            |(lo, hi), o| (lo.min(o.x()), hi.max(o.x_end())),
        )
    }

    /// Masks for planes `1..=S`.
    pub fn masks(&self, grid: &GridSpec) -> Vec<BlockageMask> {
        (1..=self.plane_count())
            .map(|s| self.mask_at(self.plane_z(s), grid))
            .collect()
    }

    pub fn mask_at(&self, z: f64, grid: &GridSpec) -> BlockageMask {
        self.obstacles
            .iter()
            .filter(|o| o.spans_plane(z))
            .fold(BlockageMask::clear(), |mask, o| {
                let lo = ((o.x() - GEOMETRY_TOLERANCE - grid.start()) / grid.dx()).ceil().max(0.0) as usize;
                let hi = ((o.x_end() + GEOMETRY_TOLERANCE - grid.start()) / grid.dx()).floor() + 1.0;
                let hi = hi.clamp(0.0, grid.count() as f64) as usize;
                mask.with_segment(lo, hi, o.attenuation())
            })
    }

    /// Number of aperture sample points in `[0, aperture_length]` whose straight
    /// path to the receiver crosses `obstacle`.
    pub fn rays_blocked_by(&self, obstacle: &Obstacle, aperture_length: f64, samples: usize) -> usize {
        aperture_samples(aperture_length, samples)
            .filter(|&x| obstacle.intersects_segment(Point::new(x, 0.0), self.receiver))
            .count()
    }

    /// Every straight path from the aperture to the receiver meets an obstacle.
    pub fn line_of_sight_blocked(&self, aperture_length: f64) -> bool {
        !self.obstacles.is_empty()
            && aperture_samples(aperture_length, LOS_SAMPLES).all(|x| {
                let p = Point::new(x, 0.0);
                self.obstacles
                    .iter()
                    .any(|o| o.intersects_segment(p, self.receiver))
            })
    }
}

/// Aperture points sampled by the line-of-sight tests.
pub const LOS_SAMPLES: usize = 257;

fn aperture_samples(length: f64, samples: usize) -> impl Iterator<Item = f64> {
    let n = samples.max(2);
    (0..n).map(move |i| length * i as f64 / (n - 1) as f64)
}
