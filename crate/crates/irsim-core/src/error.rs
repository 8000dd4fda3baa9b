use core::fmt;

/// Errors raised by simulation-core operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar or structural parameter violated its domain.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// An index-like argument fell outside its valid range.
    IndexOutOfRange {
        name: &'static str,
        index: usize,
        limit: usize,
    },
    /// Requested reflecting-unit-set blocks cannot be placed on the panel.
    RusPlacement(&'static str),
    /// Two vectors that must agree in length did not.
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    /// A distance input was zero or negative where the propagation model
    /// has a singularity.
    NonPositiveDistance { name: &'static str },
    /// A measured total delay was not longer than the known first leg, so
    /// no reflector-to-terminal range can be extracted.
    InconsistentRange {
        total_path_m: f64,
        first_leg_m: f64,
    },
    /// Fewer valid range observations than the solver needs.
    TooFewObservations { valid: usize, required: usize },
    /// An operation that needs data received none.
    EmptyInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::IndexOutOfRange { name, index, limit } => {
                write!(f, "{name} index {index} out of range (limit {limit})")
            }
            Error::RusPlacement(reason) => write!(f, "RUS placement failed: {reason}"),
            Error::LengthMismatch {
                context,
                expected,
                actual,
            } => write!(f, "{context}: expected length {expected}, got {actual}"),
            Error::NonPositiveDistance { name } => {
                write!(f, "distance `{name}` must be strictly positive")
            }
            Error::InconsistentRange {
                total_path_m,
                first_leg_m,
            } => write!(
                f,
                "total path {total_path_m} m is not longer than the known leg {first_leg_m} m"
            ),
            Error::TooFewObservations { valid, required } => {
                write!(f, "{valid} valid observations, {required} required")
            }
            Error::EmptyInput(what) => write!(f, "{what} must not be empty"),
        }
    }
}

impl core::error::Error for Error {}
