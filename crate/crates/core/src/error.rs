use alloc::string::String;
use alloc::vec::Vec;

use crate::rational::RationalError;
use crate::scenario::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Invalid(ValidationReport),
    #[error("unknown context {0:?}")]
    UnknownContext(String),
    #[error("unknown measurement {0:?}")]
    UnknownMeasurement(String),
    #[error("unknown hidden-variable point {0:?}")]
    UnknownLambda(String),
    #[error("measurement {measurement:?} is not part of context {context:?}")]
    MeasurementNotInContext {
        measurement: String,
        context: String,
    },
    #[error("unknown demo {name:?}; available: {}", available.join(", "))]
    UnknownDemo {
        name: String,
        available: Vec<&'static str>,
    },
    #[error("measurement {0:?} has no outcome values")]
    MissingOutcomeValues(String),
    #[error("contexts do not form a CHSH pattern: {0}")]
    ChshPattern(String),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("malformed noise model: {0}")]
    MalformedNoise(String),
    #[error("reconstruction mismatch in context {context:?} at {lambda:?}")]
    ReconstructionMismatch { context: String, lambda: String },
    #[error(transparent)]
    Rational(#[from] RationalError),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
