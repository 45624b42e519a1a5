//! Error type shared by every simulator module.

use crate::sim::Transcript;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, serde::Serialize, thiserror::Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum Error {
    #[error("invalid scenario: `{key}`: {reason}")]
    InvalidScenario { key: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    /// The run hit `max_ticks` without terminating. The partial public
    /// transcript is kept so that callers can still audit or digest it.
    #[error("protocol did not terminate within {max_ticks} ticks")]
    ProtocolTimeout {
        max_ticks: u64,
        transcript: Box<Transcript>,
    },

    #[error("contribution value {0} is not finite")]
    NonFiniteValue(f64),

    #[error("ramp target {0} must be positive")]
    InvalidTarget(f64),

    #[error("recovered value {value} is {distance} away from nearest domain element {nearest}")]
    OutOfDomain {
        value: f64,
        nearest: u64,
        distance: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vessel ran empty at tick {tick}")]
    VesselEmpty { tick: u64 },

    #[error("vessel overflowed at tick {tick}")]
    VesselOverflow { tick: u64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("observed transcript matches no sample in the reference set")]
    UnmatchedObservation,
}

impl Error {
    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidScenario {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures that happen inside a well-formed protocol run
    /// (as opposed to bad configuration or analysis input).
    pub fn is_protocol_failure(&self) -> bool {
        matches!(
            self,
            Error::ProtocolTimeout { .. }
                | Error::OutOfDomain { .. }
                | Error::VesselEmpty { .. }
                | Error::VesselOverflow { .. }
        )
    }
}
