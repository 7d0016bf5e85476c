//! Error type shared by every module of the crate.

use core::fmt;

/// Failures surfaced by geometry, bifunction, mapping, and solver operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operands live in different ambient dimensions.
    DimensionMismatch { expected: usize, found: usize },
    /// A halfspace was built with a zero normal and a negative offset.
    InvalidHalfspace,
    /// A set constructor rejected its data (empty box, negative radius, ...).
    InvalidSet(&'static str),
    /// Cyclic projection could not certify a point of the intersection.
    EmptyIntersection { residual: f64 },
    /// Cyclic projection ran out of sweeps before meeting its tolerances.
    NoConvergence { sweeps: usize, residual: f64 },
    /// The projected-gradient inner solver ran out of iterations.
    InnerNoConvergence { iters: usize, residual: f64 },
    /// A saddle bifunction is not convex in its second argument.
    NonConvexInY { min_eigenvalue: f64 },
    /// A matrix expected to be symmetric is not.
    NotSymmetric,
    /// A fixed-point mapping constructor rejected its data.
    InvalidMapping(&'static str),
    /// The supplied point does not reproduce itself under the mapping.
    NotAFixedPoint { residual: f64 },
    /// A trajectory handed to the demiclosedness check has not settled.
    NonConvergentTrajectory { last_step: f64 },
    /// The backtracking linesearch exhausted its exponent budget.
    LinesearchExhausted { m_max: u32 },
    /// A successful linesearch produced a (numerically) zero subgradient.
    ZeroSubgradient { norm: f64 },
    /// A sampled validation found no admissible value.
    ValidationFailed(&'static str),
    /// Solver parameters violate their admissible ranges.
    InvalidParams(&'static str),
    /// A computed quantity stopped being finite.
    NonFiniteValue,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidHalfspace => {
                write!(f, "halfspace with zero normal must have nonnegative offset")
            }
            Error::InvalidSet(msg) => write!(f, "invalid set: {msg}"),
            Error::EmptyIntersection { residual } => {
                write!(f, "intersection appears empty (residual {residual:.3e})")
            }
            Error::NoConvergence { sweeps, residual } => {
                write!(f, "cyclic projection stalled after {sweeps} sweeps (residual {residual:.3e})")
            }
            Error::InnerNoConvergence { iters, residual } => {
                write!(f, "inner solve stalled after {iters} iterations (residual {residual:.3e})")
            }
            Error::NonConvexInY { min_eigenvalue } => {
                write!(f, "bifunction is not convex in y (min eigenvalue {min_eigenvalue:.3e})")
            }
            Error::NotSymmetric => write!(f, "matrix is not symmetric"),
            Error::InvalidMapping(msg) => write!(f, "invalid mapping: {msg}"),
            Error::NotAFixedPoint { residual } => {
                write!(f, "point is not fixed under the mapping (residual {residual:.3e})")
            }
            Error::NonConvergentTrajectory { last_step } => {
                write!(f, "trajectory has not converged (last step {last_step:.3e})")
            }
            Error::LinesearchExhausted { m_max } => {
                write!(f, "linesearch failed for every exponent up to {m_max}")
            }
            Error::ZeroSubgradient { norm } => {
                write!(f, "zero subgradient after a successful linesearch (norm {norm:.3e})")
            }
            Error::ValidationFailed(msg) => write!(f, "validation failed: {msg}"),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::NonFiniteValue => write!(f, "computation produced a non-finite value"),
        }
    }
}

impl core::error::Error for Error {}
