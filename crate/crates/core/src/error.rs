use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Complex locations are stored as `(re, im)` pairs in `f64` so the type does
/// not depend on the scalar a routine was instantiated with.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite sample at node {node} (point {point:?})")]
    NonFinite { node: usize, point: (f64, f64) },

    #[error("point {point:?} is outside the open unit disk")]
    OutsideDisk { point: (f64, f64) },

    #[error("Newton inversion did not converge: last iterate {iterate:?}, residual {residual:e}")]
    NoConvergence { iterate: (f64, f64), residual: f64 },

    #[error("quadrature disagreement {difference:e} between grid levels exceeds {tolerance:e}")]
    QuadratureDisagreement { difference: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("caps {first} and {second} overlap or are closer than the required separation")]
    CapOverlap { first: usize, second: usize },

    #[error("points coincide: {0}")]
    Coincident(String),

    #[error("point {point:?} lies inside cap {cap}")]
    InsideCap { cap: usize, point: (f64, f64) },

    #[error("point {point:?} is on or inside the integration contour of cap {cap}")]
    InsideContour { cap: usize, point: (f64, f64) },

    #[error("pole on the integration path at node {node}")]
    PoleOnPath { node: usize },

    #[error("cap index {index} out of range (surface has {caps} caps)")]
    CapIndex { index: usize, caps: usize },

    #[error("{0}")]
    Invalid(String),

    #[error("residual increased from {previous:e} to {current:e} at truncation {order}")]
    ResidualIncrease { order: usize, previous: f64, current: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn pair<T: crate::numerics::Real>(z: num_complex::Complex<T>) -> (f64, f64) {
    (
        crate::numerics::to_f64(z.re),
        crate::numerics::to_f64(z.im),
    )
}
