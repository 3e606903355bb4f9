//! Error type shared by every module of the crate.

use std::fmt;

/// Everything that can go wrong while constructing values or running the
/// iterative solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two inputs that must agree in length (e.g. function values vs. points)
    /// do not.
    DimensionMismatch { expected: usize, got: usize },
    /// The operation needs at least one point.
    EmptySpace,
    /// The operation needs a nonempty index set.
    EmptySet,
    /// An index refers past the end of the point list.
    IndexOutOfRange { index: usize, len: usize },
    /// A constructor rejected its arguments; the message says why.
    Invalid(String),
    /// An iterative solver failed to converge; the message names the solver.
    Numeric(String),
    /// The convex conjugate is +infinity at this argument because |y| exceeds
    /// the limiting slope of the Young function.
    UnboundedConjugate { y: f64, limiting_slope: f64 },
    /// Net-based searches refuse dimensions whose cost would explode.
    DimensionTooLarge { n: usize, max: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "dimension mismatch: expected {expected} values, got {got}"
                )
            }
            Error::EmptySpace => write!(f, "operation requires a nonempty measure space"),
            Error::EmptySet => write!(f, "operation requires a nonempty index set"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "point index {index} out of range for {len} points")
            }
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            Error::UnboundedConjugate { y, limiting_slope } => write!(
                f,
                "conjugate is unbounded at y = {y}: |y| exceeds the limiting slope {limiting_slope}"
            ),
            Error::DimensionTooLarge { n, max } => {
                write!(f, "dimension {n} too large for net search (max {max})")
            }
        }
    }
}

impl std::error::Error for Error {}
