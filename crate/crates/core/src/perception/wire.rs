//! Line-oriented text protocol between the server and a recognizer backend.
//!
//! ```text
//! server → backend   HELLO actions=<sha256-hex> attributes=<sha256-hex>
//! backend → server   OK | ERROR code=<code>
//! server → backend   EVALUATE performance=<id> camera=<id> frames=<ref>,<ref>[ scene=<json>]
//! backend → server   RESULT actions=<p>,..,<p> attributes=<p>,..,<p> | ERROR code=<code>
//! ```
//!
//! One message per `\n`-terminated line. Probabilities are written in
//! scientific notation with 17 significant digits, which round-trips `f64`
//! exactly. The optional `scene` field carries a [`SimulatedScene`] for
//! backends that stand in for real cameras.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use super::SimulatedScene;
use crate::domain::{CameraId, PerformanceId, Vocabulary};
use crate::scoring::RecognitionOutput;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VocabHashes {
    pub actions: String,
    pub attributes: String,
}

impl VocabHashes {
    pub fn of(vocab: &Vocabulary) -> Self {
        Self {
            actions: vocab.actions.digest(),
            attributes: vocab.attributes.digest(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendKind {
    Synthetic,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecognizerBackendDescriptor {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub vocab_hashes: VocabHashes,
}

impl RecognizerBackendDescriptor {
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<(), GatewayError> {
        if self.vocab_hashes == VocabHashes::of(vocab) {
            Ok(())
        } else {
            Err(GatewayError::VocabularyMismatch)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("unknown camera {0}")]
    UnknownCamera(CameraId),
    #[error("evaluation unavailable: {0}")]
    EvaluationUnavailable(String),
    #[error("malformed backend output: {0}")]
    MalformedBackendOutput(String),
    #[error("recognizer vocabulary does not match the server's")]
    VocabularyMismatch,
    #[error("protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireErrorCode {
    VocabMismatch,
    NoSubject,
    BadMessage,
    Internal,
}

impl WireErrorCode {
    fn as_str(self) -> &'static str {
        match self {
            Self::VocabMismatch => "vocab-mismatch",
            Self::NoSubject => "no-subject",
            Self::BadMessage => "bad-message",
            Self::Internal => "internal",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vocab-mismatch" => Self::VocabMismatch,
            "no-subject" => Self::NoSubject,
            "bad-message" => Self::BadMessage,
            "internal" => Self::Internal,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    Hello(VocabHashes),
    Ok,
    Evaluate {
        performance_id: PerformanceId,
        camera_id: CameraId,
        frame_refs: Vec<String>,
        scene: Option<SimulatedScene>,
    },
    Result(RecognitionOutput),
    Error(WireErrorCode),
}

fn join_probs(probs: &[f64]) -> String {
    probs
        .iter()
        .map(|p| format!("{p:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_probs(s: &str) -> Result<Vec<f64>, GatewayError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| GatewayError::Protocol(format!("bad probability {t:?}")))
        })
        .collect()
}

impl fmt::Display for WireMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hello(h) => write!(f, "HELLO actions={} attributes={}", h.actions, h.attributes),
            Self::Ok => f.write_str("OK"),
            Self::Evaluate {
                performance_id,
                camera_id,
                frame_refs,
                scene,
            } => {
                write!(
                    f,
                    "EVALUATE performance={} camera={} frames={}",
                    performance_id.0,
                    camera_id.0,
                    frame_refs.join(",")
                )?;
                if let Some(scene) = scene {
                    write!(f, " scene={}", crate::domain::to_canonical(scene))?;
                }
                Ok(())
            }
            Self::Result(out) => write!(
                f,
                "RESULT actions={} attributes={}",
                join_probs(&out.action_probs),
                join_probs(&out.attribute_probs)
            ),
            Self::Error(code) => write!(f, "ERROR code={}", code.as_str()),
        }
    }
}

impl WireMessage {
    /// Encoded line including the trailing newline.
    pub fn encode(&self) -> String {
        format!("{self}\n")
    }

    pub fn parse(line: &str) -> Result<Self, GatewayError> {
        let line = line.trim_end_matches(['\r', '\n']);
        let (verb, rest) = line.split_once(' ').unwrap_or((line, ""));
        let bad = |why: &str| GatewayError::Protocol(format!("{why}: {line:?}"));
        let mut fields = Fields::new(rest);
        let msg = match verb {
            "HELLO" => Self::Hello(VocabHashes {
                actions: fields.take("actions").ok_or_else(|| bad("missing actions"))?.to_string(),
                attributes: fields.take("attributes").ok_or_else(|| bad("missing attributes"))?.to_string(),
            }),
            "OK" => Self::Ok,
            "EVALUATE" => {
                let performance_id = fields
                    .take("performance")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("bad performance"))?;
                let camera_id = fields
                    .take("camera")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("bad camera"))?;
                let frames = fields.take("frames").ok_or_else(|| bad("missing frames"))?;
                let frame_refs = if frames.is_empty() {
                    Vec::new()
                } else {
                    frames.split(',').map(str::to_string).collect()
                };
                let scene = match fields.take_rest("scene") {
                    Some(json) => Some(crate::domain::from_canonical(json).map_err(|_| bad("bad scene"))?),
                    None => None,
                };
                Self::Evaluate {
                    performance_id: PerformanceId(performance_id),
                    camera_id: CameraId(camera_id),
                    frame_refs,
                    scene,
                }
            }
            "RESULT" => Self::Result(RecognitionOutput {
                action_probs: parse_probs(fields.take("actions").ok_or_else(|| bad("missing actions"))?)?,
                attribute_probs: parse_probs(fields.take("attributes").ok_or_else(|| bad("missing attributes"))?)?,
            }),
            "ERROR" => Self::Error(
                fields
                    .take("code")
                    .and_then(WireErrorCode::parse)
                    .ok_or_else(|| bad("bad error code"))?,
            ),
            _ => return Err(bad("unknown verb")),
        };
        Ok(msg)
    }
}

/// Sequential `key=value` reader over the space-separated fields of a line.
struct Fields<'a> {
    rest: &'a str,
}

impl<'a> Fields<'a> {
    fn new(rest: &'a str) -> Self {
        Self { rest }
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        let value_start = self.rest.strip_prefix(key)?.strip_prefix('=')?;
        let (value, rest) = value_start.split_once(' ').unwrap_or((value_start, ""));
        self.rest = rest;
        Some(value)
    }

    /// The value of `key`, running to the end of the line.
    fn take_rest(&mut self, key: &str) -> Option<&'a str> {
        let value = self.rest.strip_prefix(key)?.strip_prefix('=')?;
        self.rest = "";
        Some(value)
    }
}

/// Accept a backend's output only if it satisfies every recognition
/// invariant for this vocabulary.
pub fn validate_backend_output(
    output: RecognitionOutput,
    vocab: &Vocabulary,
) -> Result<RecognitionOutput, GatewayError> {
    output
        .validate(vocab.action_count(), vocab.attribute_count())
        .map_err(|e| GatewayError::MalformedBackendOutput(e.to_string()))?;
    Ok(output)
}
