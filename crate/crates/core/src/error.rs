use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("radiation ratio {value} at element {index} is outside [0, 1]")]
    RatioOutOfRange { index: usize, value: f64 },

    #[error("power budget violated: sum of eta_eq * m^2 * s is {total}")]
    PowerBudget { total: f64 },

    #[error("degenerate excitation: no element radiates")]
    DegenerateExcitation,

    #[error("trajectory is not defined at x = {x} (a * (c - x) < 0)")]
    OutsideValidity { x: f64 },

    #[error("curvature is zero; the trajectory degenerates to a straight line")]
    ZeroCurvature,

    #[error("anchor points share the same depth z = {z}; the offset system is singular")]
    SingularSystem { z: f64 },

    #[error("offset c = {c} is infeasible: {reason}")]
    InfeasibleOffset { c: f64, reason: String },

    #[error("farthest tangent ray reaches z = {z_max} which is not before the user at z = {z_user}")]
    EstimatorInvalid { z_max: f64, z_user: f64 },

    #[error("no feasible offset in [{lo}, {hi}]")]
    NoFeasibleOffset { lo: f64, hi: f64 },

    #[error("grid spacing {dx} is too coarse for element spacing {spacing}")]
    GridTooCoarse { dx: f64, spacing: f64 },

    #[error("element at x = {x} lies outside the grid [{start}, {end}]")]
    OutsideGrid { x: f64, start: f64, end: f64 },

    #[error("the receiver line of sight is not blocked")]
    NotBlocked,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
