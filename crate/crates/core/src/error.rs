use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors surfaced by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// Bath generation produced no sites.
    EmptyBath,
    /// A product space exceeded the exact-solver dimension cap.
    DimensionCap { dim: usize, cap: usize },
    /// A matrix required to be Hermitian was not, beyond tolerance.
    NonHermitian { deviation: f64 },
    /// Two sites coincide; dipolar coupling is singular.
    CoincidentSites,
    /// The requested pulse sequence is not defined for the scenario.
    UnsupportedSequence,
    /// A sub-cluster correlation fell below the divisor threshold while
    /// assembling the expansion. Expected for the original-CCE comparison
    /// mode at long times; signals breakdown of the expansion.
    NumericalBreakdown { cluster: Vec<u32>, time_ms: f64 },
    /// Leap-frog step size violates the stability bound (rad/ms).
    UnstableTimeStep { dt_ms: f64, bound_ms: f64 },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            CoreError::EmptyBath => write!(f, "bath generation produced no sites"),
            CoreError::DimensionCap { dim, cap } => {
                write!(f, "product-space dimension {dim} exceeds cap {cap}")
            }
            CoreError::NonHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (max deviation {deviation:e})")
            }
            CoreError::CoincidentSites => write!(f, "coincident site positions"),
            CoreError::UnsupportedSequence => {
                write!(f, "pulse sequence not supported for this scenario")
            }
            CoreError::NumericalBreakdown { cluster, time_ms } => write!(
                f,
                "near-zero cluster correlation divisor for cluster {cluster:?} at t = {time_ms} ms"
            ),
            CoreError::UnstableTimeStep { dt_ms, bound_ms } => write!(
                f,
                "leap-frog step {dt_ms} ms violates stability bound {bound_ms} ms"
            ),
        }
    }
}

impl core::error::Error for CoreError {}
