//! Crate-wide error type.

use std::fmt;

/// Errors reported by the numerical routines in this crate.
///
/// Each variant carries a human-readable description of the offending
/// argument or the failure condition. Non-convergence of the calibration
/// optimizer is *not* an error — it is reported through
/// [`FitResult::converged`](crate::calibrate::FitResult); this type covers
/// genuine contract violations and numerical failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain(String),
    /// The result (or a mandatory intermediate) exceeds the representable
    /// range of `f64`; overflow is signaled rather than silently saturated.
    Overflow(String),
    /// An iterative scheme failed to reach the requested tolerance within
    /// its iteration budget.
    Convergence(String),
    /// A runtime-checked precondition does not hold for the given inputs.
    Precondition(String),
    /// A least-squares system is rank deficient (duplicate abscissas or more
    /// coefficients than samples).
    RankDeficient(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Overflow(msg) => write!(f, "overflow: {msg}"),
            Error::Convergence(msg) => write!(f, "convergence failure: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::RankDeficient(msg) => write!(f, "rank deficiency: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
