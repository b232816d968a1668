//! Per-attempt live status channels.
//!
//! A channel is identified by a token. Whichever side arrives first (the
//! subscriber or the attempt) creates it; messages are buffered until read,
//! so a late subscriber still sees every status in order. Each side may
//! attach once; a second subscriber or a second attempt is rejected.

use std::collections::HashMap;
use std::sync::Mutex;

use lia_core::domain::BoundingBox;
use lia_core::engine::ErrorClass;
use lia_core::Verdict;
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver, UnboundedSender};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LiveStatus {
    Detecting,
    Detected {
        #[serde(rename = "box")]
        detected_box: BoundingBox,
    },
    Evaluating,
    Result {
        score: f64,
        verdict: Verdict,
    },
    /// Terminal message for an attempt that ended without a verdict.
    Failed {
        error: ErrorClass,
        message: String,
    },
}

impl LiveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            LiveStatus::Detecting => "DETECTING",
            LiveStatus::Detected { .. } => "DETECTED",
            LiveStatus::Evaluating => "EVALUATING",
            LiveStatus::Result { .. } => "RESULT",
            LiveStatus::Failed { .. } => "FAILED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttachError {
    AlreadySubscribed,
    AlreadyInUse,
}

struct Slot {
    sender: Option<UnboundedSender<LiveStatus>>,
    receiver: Option<UnboundedReceiver<LiveStatus>>,
}

#[derive(Default)]
pub struct LiveHub {
    slots: Mutex<HashMap<String, Slot>>,
}

/// Producer side of a channel; dropping it ends the stream.
pub struct LivePublisher(Option<UnboundedSender<LiveStatus>>);

impl LivePublisher {
    pub fn none() -> Self {
        Self(None)
    }

    pub fn push(&self, status: LiveStatus) {
        if let Some(tx) = &self.0 {
            // A subscriber that went away is not an error for the attempt.
            let _ = tx.send(status);
        }
    }
}

impl LiveHub {
    fn with_slot<T>(&self, token: &str, f: impl FnOnce(&mut Slot) -> T) -> T {
        let mut slots = self.slots.lock().expect("live hub poisoned");
        let slot = slots.entry(token.to_string()).or_insert_with(|| {
            let (tx, rx) = unbounded_channel();
            Slot {
                sender: Some(tx),
                receiver: Some(rx),
            }
        });
        f(slot)
    }

    pub fn publisher(&self, token: &str) -> Result<LivePublisher, AttachError> {
        self.with_slot(token, |s| s.sender.take().map(|tx| LivePublisher(Some(tx))).ok_or(AttachError::AlreadyInUse))
    }

    pub fn subscribe(&self, token: &str) -> Result<UnboundedReceiver<LiveStatus>, AttachError> {
        self.with_slot(token, |s| s.receiver.take().ok_or(AttachError::AlreadySubscribed))
    }
}
