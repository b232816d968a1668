//! Everything between a performer pressing "start" and a validated
//! [`RecognitionOutput`](crate::scoring::RecognitionOutput): presence checks,
//! the seedable synthetic recognizer and the text protocol spoken with
//! external recognizer backends.

mod presence;
mod synthetic;
pub mod wire;

pub use presence::{verify_presence, verify_presence_at, PresenceCheck, DEFAULT_RADIUS_M};
pub use synthetic::{
    synth_recognize, RecognizerSettings, SimulatedScene, SyntheticProfile, CALIBRATED_ACTION_ACCURACY,
    CALIBRATED_ATTRIBUTE_ACCURACY, CALIBRATED_CONCENTRATION,
};
pub use wire::{BackendKind, GatewayError, RecognizerBackendDescriptor, VocabHashes, WireMessage};

/// Longest stretch of frames a single attempt may cover.
pub const PERFORMANCE_WINDOW_MS: i64 = 30_000;
