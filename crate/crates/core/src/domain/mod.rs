//! Shared vocabulary of the platform.
//!
//! Every type here has a canonical text encoding (JSON, kebab-case field
//! names, maps and sets in sorted order) used by the event log, the recognizer
//! protocol and scenario files. See [`to_canonical`] and [`from_canonical`].

mod camera;
mod player;
mod request;
mod vocab;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use camera::{BoundingBox, Camera, FrameSize, GeoPoint, Pixel, Polygon};
pub use player::{Friendships, Player};
pub use request::{
    validate_config, ConfigViolation, Performance, RequestConfig, RequestState, Review,
    SocialRequest, TransitionError, Verdict,
};
pub use vocab::{ActionVocabulary, AttributeVocabulary, Vocabulary, DEFAULT_ACTIONS};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Server-issued player identity.
    PlayerId,
    "p"
);
id_type!(CameraId, "cam");
id_type!(RequestId, "req");
id_type!(PerformanceId, "perf");

/// Milliseconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn now() -> Self {
        let ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0);
        Timestamp(ms)
    }

    pub fn plus_millis(self, ms: i64) -> Self {
        Timestamp(self.0 + ms)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("vocabulary labels must be distinct and non-empty: {0}")]
    BadVocabulary(String),
    #[error("invalid camera {camera}: {reason}")]
    BadCamera { camera: CameraId, reason: String },
    #[error("review overall score must be in 1..=5, got {0}")]
    ReviewScoreOutOfRange(u8),
    #[error("encoding error: {0}")]
    Encoding(#[from] serde_json::Error),
}

/// Encode a value in the canonical text form.
pub fn to_canonical<T: Serialize>(value: &T) -> String {
    // Serialization of these plain data types cannot fail.
    serde_json::to_string(value).expect("domain types always serialize")
}

pub fn from_canonical<T: DeserializeOwned>(text: &str) -> Result<T, DomainError> {
    Ok(serde_json::from_str(text)?)
}
