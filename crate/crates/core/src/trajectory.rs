//! Parabolic beam trajectories `x = a z^2 + b z + c` and the aperture phase
//! that makes them the caustic of the emitted ray family.
//!
//! A point `x` of the aperture emits the ray tangent to the parabola at depth
//! `z0 = sqrt((c - x) / a)`. That ray only exists when `a (c - x) >= 0`, which
//! is what splits the aperture into an active and an inactive part.

use crate::error::{invalid, Error, Result};

/// A point of the (x, z) plane, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

/// The point the curved beam has to pass to get around an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstaclePoint {
    x: f64,
    z: f64,
}

impl ObstaclePoint {
    pub fn new(x: f64, z: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid("obstacle_point.x", "must be finite"));
        }
        if !(z.is_finite() && z > 0.0) {
            return Err(invalid("obstacle_point.z", format!("must be positive, got {z}")));
        }
        Ok(Self { x, z })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvatureSign {
    Positive,
    Negative,
}

impl CurvatureSign {
    pub fn of(a: f64) -> Self {
        if a > 0.0 {
            Self::Positive
        } else {
            Self::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    a: f64,
    b: f64,
    c: f64,
}

impl Trajectory {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(invalid("trajectory", "coefficients must be finite"));
        }
        if a == 0.0 {
            return Err(Error::ZeroCurvature);
        }
        Ok(Self { a, b, c })
    }

    /// The parabola with offset `c` passing through both `user` and `obstacle`.
    pub fn through(user: Point, obstacle: ObstaclePoint, c: f64) -> Result<Self> {
        let (a, b) = solve_ab_from_c(user, obstacle, c)?;
        Self::new(a, b, c)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sign(&self) -> CurvatureSign {
        CurvatureSign::of(self.a)
    }

    /// `f(z)`.
    pub fn x_at(&self, z: f64) -> f64 {
        (self.a * z + self.b) * z + self.c
    }

    /// `f'(z)`.
    pub fn slope_at(&self, z: f64) -> f64 {
        2.0 * self.a * z + self.b
    }

    /// Whether aperture point `x` emits a ray tangent to the parabola.
    pub fn is_valid_at(&self, x: f64) -> bool {
        self.a * (self.c - x) >= 0.0
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.is_valid_at(x) {
            Ok(())
        } else {
            Err(Error::OutsideValidity { x })
        }
    }

    /// Depth at which the ray leaving `x` touches the parabola.
    pub fn tangent_point(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(((self.c - x) / self.a).sqrt())
    }

    /// `psi(x) = 2a sqrt((c - x)/a) + b`, the parabola slope at the tangent point.
    pub fn psi(&self, x: f64) -> Result<f64> {
        Ok(self.slope_at(self.tangent_point(x)?))
    }

    /// Aperture phase whose gradient `k f'/sqrt(1 + f'^2)` launches the tangent rays.
    pub fn phase(&self, wavenumber: f64, x: f64) -> Result<f64> {
        let psi = self.psi(x)?;
        let root = psi.mul_add(psi, 1.0).sqrt();
        Ok(wavenumber / (4.0 * self.a) * (psi.asinh() + (2.0 * self.b - psi) * root))
    }

    /// Aperture end whose tangent ray reaches deepest: x = 0 when `a > 0`,
    /// x = `aperture_length` when `a < 0`.
    pub fn boundary_x(&self, aperture_length: f64) -> f64 {
        match self.sign() {
            CurvatureSign::Positive => 0.0,
            CurvatureSign::Negative => aperture_length,
        }
    }

    /// Farthest depth still fed by a tangent ray from the aperture.
    pub fn z_max(&self, aperture_length: f64) -> Result<f64> {
        let x = self.boundary_x(aperture_length);
        self.tangent_point(x).map_err(|_| Error::InfeasibleOffset {
            c: self.c,
            reason: format!("no tangent ray leaves the aperture boundary x = {x}"),
        })
    }
}

/// Free function form of [`Trajectory::phase`].
pub fn phase_profile(traj: &Trajectory, wavenumber: f64, x: f64) -> Result<f64> {
    traj.phase(wavenumber, x)
}

/// Solves `f(z_r) = x_r`, `f(z_o) = x_o` for `(a, b)` at fixed offset `c`.
pub fn solve_ab_from_c(user: Point, obstacle: ObstaclePoint, c: f64) -> Result<(f64, f64)> {
    let (xr, zr) = (user.x, user.z);
    let (xo, zo) = (obstacle.x(), obstacle.z());
    if !(zr.is_finite() && zr > 0.0) {
        return Err(invalid("user.z", format!("must be positive, got {zr}")));
    }
    if zr == zo {
        return Err(Error::SingularSystem { z: zr });
    }
    let det = zr * zo * (zr - zo);
    let (ur, uo) = (xr - c, xo - c);
    let a = (ur * zo - uo * zr) / det;
    let b = (uo * zr * zr - ur * zo * zo) / det;
    if a.abs() < 1e-12 {
        return Err(Error::ZeroCurvature);
    }
    Ok((a, b))
}

/// Outcome of checking an offset against an aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetCheck {
    pub sign: CurvatureSign,
    pub c: f64,
    /// Number of elements with `a (c - x_n) >= 0`.
    pub active_count: usize,
    pub element_count: usize,
    /// Extent of the active part of `[0, l]`, if any.
    pub active_interval: Option<(f64, f64)>,
    /// Offset lies on the aperture side required for an amplitude-only
    /// surface: `0 < c <= l` when `a > 0`, `0 <= c < l` when `a < 0`.
    pub within_aperture: bool,
    /// Enough active elements to form a caustic.
    pub feasible: bool,
}

impl OffsetCheck {
    /// A phase-only array is only undistorted when every element is active.
    pub fn full_aperture(&self) -> bool {
        self.active_count == self.element_count
    }
}

pub const DEFAULT_MIN_ACTIVE: usize = 8;

pub fn feasible_offset(
    sign: CurvatureSign,
    c: f64,
    element_positions: &[f64],
    min_active: usize,
) -> OffsetCheck {
    let active = |x: f64| match sign {
        CurvatureSign::Positive => x <= c,
        CurvatureSign::Negative => x >= c,
    };
    let active_count = element_positions.iter().filter(|&&x| active(x)).count();
    let l = element_positions.last().copied().unwrap_or(0.0);
    let active_interval = match sign {
        CurvatureSign::Positive if c >= 0.0 => Some((0.0, c.min(l))),
        CurvatureSign::Negative if c <= l => Some((c.max(0.0), l)),
        _ => None,
    };
    let within_aperture = match sign {
        CurvatureSign::Positive => c > 0.0 && c <= l,
        CurvatureSign::Negative => (0.0..l).contains(&c),
    };
    OffsetCheck {
        sign,
        c,
        active_count,
        element_count: element_positions.len(),
        active_interval,
        within_aperture,
        feasible: active_count >= min_active.max(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const K: f64 = 2.0 * PI / 0.003;

    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let inner: f64 = (1..n)
            .map(|i| f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        (f(lo) + f(hi) + inner) * h / 3.0
    }

    #[test]
    fn phase_vanishes_at_offset_without_slope() {
        for a in [1.0, -3.0, 0.2] {
            let t = Trajectory::new(a, 0.0, 0.07).unwrap();
            assert_eq!(t.psi(0.07).unwrap(), 0.0);
            assert_eq!(t.phase(K, 0.07).unwrap(), 0.0);
        }
    }

    #[test]
    fn phase_matches_quadrature_of_gradient() {
        let t = Trajectory::new(1.0, 0.0, 0.1).unwrap();
        // dphi/dx = k psi / sqrt(1 + psi^2); substituting x = c - u^2 removes
        // the square-root endpoint behavior so Simpson converges quickly
        let integrand = |u: f64| {
            let psi = t.psi(t.c() - u * u).unwrap();
            -2.0 * u * K * psi / (1.0 + psi * psi).sqrt()
        };
        let expected = t.phase(K, t.c()).unwrap() + simpson(integrand, 0.0, t.c().sqrt(), 4000);
        let got = t.phase(K, 0.0).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn tangent_point_examples() {
        let t = Trajectory::new(1.0, 0.0, 0.04).unwrap();
        assert_eq!(t.tangent_point(0.04).unwrap(), 0.0);
        let z0 = t.tangent_point(0.0).unwrap();
        assert!((z0 - 0.2).abs() < 1e-15);
        assert!((t.x_at(z0) - z0 * t.slope_at(z0)).abs() < 1e-15);
        assert_eq!(t.tangent_point(0.05), Err(Error::OutsideValidity { x: 0.05 }));
    }

    #[test]
    fn z_max_examples() {
        let t = Trajectory::new(1.0, 0.3, 0.04).unwrap();
        assert!((t.z_max(0.2).unwrap() - 0.2).abs() < 1e-15);
        let t = Trajectory::new(-1.0, 0.0, 0.1).unwrap();
        assert!((t.z_max(0.2).unwrap() - 0.1f64.sqrt()).abs() < 1e-15);
        let t = Trajectory::new(-1.0, 0.0, 0.3).unwrap();
        assert!(matches!(t.z_max(0.2), Err(Error::InfeasibleOffset { .. })));
    }

    #[test]
    fn zero_curvature_rejected() {
        assert_eq!(Trajectory::new(0.0, 1.0, 0.0), Err(Error::ZeroCurvature));
    }

    #[test]
    fn solve_hand_example() {
        let obs = ObstaclePoint::new(0.25, 0.5).unwrap();
        let (a, b) = solve_ab_from_c(Point::new(1.0, 1.0), obs, 0.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert!(b.abs() < 1e-15);
    }

    #[test]
    fn collinear_anchors_are_degenerate() {
        // line x = 0.05 + 0.5 z through (0.05, 0) and the user
        let user = Point::new(0.55, 1.0);
        let obs = ObstaclePoint::new(0.3, 0.5).unwrap();
        assert_eq!(solve_ab_from_c(user, obs, 0.05), Err(Error::ZeroCurvature));
    }

    #[test]
    fn singular_system() {
        let obs = ObstaclePoint::new(0.1, 1.0).unwrap();
        assert_eq!(
            solve_ab_from_c(Point::new(0.0, 1.0), obs, 0.0),
            Err(Error::SingularSystem { z: 1.0 })
        );
        assert!(ObstaclePoint::new(0.0, 0.0).is_err());
    }

    fn aperture(n: usize, l: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * l / (n - 1) as f64).collect()
    }

    #[test]
    fn offset_feasibility_examples() {
        let x = aperture(101, 0.2);
        let half = feasible_offset(CurvatureSign::Positive, 0.1, &x, 8);
        assert!(half.feasible && half.within_aperture);
        assert_eq!(half.active_interval, Some((0.0, 0.1)));
        assert_eq!(half.active_count, 51);
        assert!(!half.full_aperture());

        let far = feasible_offset(CurvatureSign::Positive, 0.4, &x, 8);
        assert!(far.feasible && far.full_aperture());
        assert_eq!(far.active_interval, Some((0.0, 0.2)));

        let edge = feasible_offset(CurvatureSign::Negative, 0.0, &x, 8);
        assert_eq!(edge.active_interval, Some((0.0, 0.2)));
        assert!(edge.within_aperture && edge.full_aperture());

        let empty = feasible_offset(CurvatureSign::Positive, -0.1, &x, 8);
        assert!(!empty.feasible);
        assert_eq!(empty.active_interval, None);

        let sparse = feasible_offset(CurvatureSign::Negative, 0.2 - 0.0021, &x, 8);
        assert_eq!(sparse.active_count, 2);
        assert!(!sparse.feasible);
    }

    fn valid_sample() -> impl Strategy<Value = (Trajectory, f64)> {
        (0.05f64..5.0, any::<bool>(), -1.0f64..1.0, -0.3f64..0.5, 0.05f64..1.0)
            .prop_filter_map("slope too flat for a relative check", |(mag, neg, b, c, z0)| {
                let a = if neg { -mag } else { mag };
                let psi = 2.0 * a * z0 + b;
                (psi.abs() > 0.05).then(|| (Trajectory::new(a, b, c).unwrap(), c - a * z0 * z0))
            })
    }

    proptest! {
        #[test]
        fn tangent_identity((t, x) in valid_sample()) {
            let z0 = t.tangent_point(x).unwrap();
            prop_assert!((t.x_at(z0) - z0 * t.slope_at(z0) - x).abs() < 1e-12);
        }

        #[test]
        fn phase_gradient_law((t, x) in valid_sample()) {
            let h = 1e-7;
            prop_assume!(t.is_valid_at(x + h) && t.is_valid_at(x - h));
            let fd = (t.phase(K, x + h).unwrap() - t.phase(K, x - h).unwrap()) / (2.0 * h);
            let slope = t.slope_at(t.tangent_point(x).unwrap());
            let expected = K * slope / (1.0 + slope * slope).sqrt();
            prop_assert!(((fd - expected) / expected).abs() < 1e-5);
            prop_assert!(fd.abs() < K);
        }

        #[test]
        fn psi_monotone_and_anchored(a in prop_oneof![0.05f64..5.0, -5.0f64..-0.05], b in -1.0f64..1.0, c in -0.3f64..0.5) {
            let t = Trajectory::new(a, b, c).unwrap();
            prop_assert_eq!(t.psi(c).unwrap(), b);
            let step = if a > 0.0 { -0.01 } else { 0.01 };
            let values: Vec<f64> = (0..20).map(|i| t.psi(c + step * i as f64).unwrap()).collect();
            let increasing = a > 0.0;
            for w in values.windows(2) {
                let ordered = if increasing { w[1] > w[0] } else { w[1] < w[0] };
                prop_assert!(ordered);
            }
        }

        #[test]
        fn anchors_reproduced(c in -0.3f64..0.4, xr in -0.5f64..0.5, zr in 1.0f64..3.0, xo in -0.2f64..0.2, zo in 0.2f64..0.9) {
            let obs = ObstaclePoint::new(xo, zo).unwrap();
            if let Ok(t) = Trajectory::through(Point::new(xr, zr), obs, c) {
                prop_assert!((t.x_at(zr) - xr).abs() <= 1e-9 * xr.abs().max(1.0));
                prop_assert!((t.x_at(zo) - xo).abs() <= 1e-9 * xo.abs().max(1.0));
            }
        }

        #[test]
        fn z_max_is_boundary_tangent(a in prop_oneof![0.05f64..5.0, -5.0f64..-0.05], b in -1.0f64..1.0, frac in 0.0f64..1.0) {
            let l = 0.2;
            let c = frac * l;
            let t = Trajectory::new(a, b, c).unwrap();
            let z = t.z_max(l).unwrap();
            let z0 = t.tangent_point(t.boundary_x(l)).unwrap();
            prop_assert!((z - z0).abs() < 1e-12);
            prop_assert!((t.x_at(z) - z * t.slope_at(z) - t.boundary_x(l)).abs() < 1e-12);
        }
    }
}
