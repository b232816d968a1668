//! Core of the Love in Action platform.
//!
//! Players publish social requests naming a body action and a visual style;
//! friends answer them by performing in front of a public camera. This crate
//! holds everything that does not touch the network:
//!
//! - [`domain`]: shared vocabulary and invariants (players, cameras, requests, performances).
//! - [`scoring`]: mask-and-fuse matching score and the pass/fail decision.
//! - [`perception`]: presence verification, the synthetic recognizer and the recognizer wire protocol.
//! - [`engine`]: the event-sourced game state machine, EP escrow ledger and leaderboard.
//! - [`analysis`]: positivity scores, paired t-tests, Student t critical values and gameplay statistics.

pub mod analysis;
pub mod domain;
pub mod engine;
pub mod perception;
pub mod scoring;

pub use domain::{
    ActionVocabulary, AttributeVocabulary, Camera, CameraId, ConfigViolation, GeoPoint, Performance,
    PerformanceId, Player, PlayerId, RequestConfig, RequestId, RequestState, Review, SocialRequest,
    Timestamp, Verdict, Vocabulary,
};
pub use engine::{Game, GameError};
pub use scoring::{MatchResult, RecognitionOutput, ScoringParams};
