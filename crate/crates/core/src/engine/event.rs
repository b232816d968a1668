//! Event records and their on-disk line format:
//! `<sequence>\t<timestamp>\t<event-kind>\t<payload>`, where the payload is
//! the canonical encoding of `{"actor": .., "delta": ..}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::domain::{
    Camera, CameraId, Performance, PerformanceId, PlayerId, RequestId, Review, SocialRequest, Timestamp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Actor {
    System,
    Player(PlayerId),
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::System => f.write_str("system"),
            Actor::Player(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Actor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "system" {
            return Ok(Actor::System);
        }
        s.strip_prefix('p')
            .and_then(|n| n.parse().ok())
            .map(|n| Actor::Player(PlayerId(n)))
            .ok_or_else(|| format!("bad actor {s:?}"))
    }
}

impl Serialize for Actor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Actor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "delta")]
pub enum Event {
    #[serde(rename_all = "kebab-case")]
    PlayerRegistered {
        player_id: PlayerId,
        display_name: String,
        joined_at: Timestamp,
    },
    #[serde(rename_all = "kebab-case")]
    InitialAllocation { player_id: PlayerId, amount: u64 },
    FriendshipAdded { a: PlayerId, b: PlayerId },
    FriendshipRemoved { a: PlayerId, b: PlayerId },
    CameraRegistered { camera: Camera },
    RequestPublished { request: SocialRequest },
    PerformanceRecorded { performance: Performance },
    #[serde(rename_all = "kebab-case")]
    RequestFulfilled {
        request_id: RequestId,
        performance_id: PerformanceId,
        performer_id: PlayerId,
        reward: u64,
    },
    #[serde(rename_all = "kebab-case")]
    ReviewSubmitted {
        performance_id: PerformanceId,
        request_id: RequestId,
        requester_id: PlayerId,
        review: Review,
    },
    #[serde(rename_all = "kebab-case")]
    RequestCancelled {
        request_id: RequestId,
        requester_id: PlayerId,
        refund: u64,
    },
    /// An attempt that produced no verdict because evaluation infrastructure
    /// failed. Carries no ledger or medal consequences.
    #[serde(rename_all = "kebab-case")]
    AttemptVoided {
        performance_id: PerformanceId,
        request_id: RequestId,
        performer_id: PlayerId,
        camera_id: CameraId,
        reason: String,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::PlayerRegistered { .. } => "player-registered",
            Event::InitialAllocation { .. } => "initial-allocation",
            Event::FriendshipAdded { .. } => "friendship-added",
            Event::FriendshipRemoved { .. } => "friendship-removed",
            Event::CameraRegistered { .. } => "camera-registered",
            Event::RequestPublished { .. } => "request-published",
            Event::PerformanceRecorded { .. } => "performance-recorded",
            Event::RequestFulfilled { .. } => "request-fulfilled",
            Event::ReviewSubmitted { .. } => "review-submitted",
            Event::RequestCancelled { .. } => "request-cancelled",
            Event::AttemptVoided { .. } => "attempt-voided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub sequence: u64,
    pub timestamp: Timestamp,
    pub actor: Actor,
    pub event: Event,
}

#[derive(Debug, Error)]
pub enum LogParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

impl EventRecord {
    /// One log line, without the trailing newline.
    pub fn to_line(&self) -> String {
        let tagged = serde_json::to_value(&self.event).expect("events always serialize");
        let delta = tagged.get("delta").cloned().unwrap_or(Value::Null);
        let payload = json!({ "actor": self.actor, "delta": delta });
        format!(
            "{}\t{}\t{}\t{}",
            self.sequence,
            self.timestamp.0,
            self.event.kind(),
            serde_json::to_string(&payload).expect("payload always serializes")
        )
    }

    /// Parse a log line; `line_no` is only used in error messages.
    pub fn parse_line(text: &str, line_no: usize) -> Result<Self, LogParseError> {
        let bad = |reason: String| LogParseError::Malformed { line: line_no, reason };
        let mut cols = text.trim_end_matches(['\r', '\n']).splitn(4, '\t');
        let (Some(seq), Some(ts), Some(kind), Some(payload)) = (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(bad("expected four tab-separated columns".into()));
        };
        let sequence: u64 = seq.parse().map_err(|_| bad(format!("bad sequence {seq:?}")))?;
        let timestamp: i64 = ts.parse().map_err(|_| bad(format!("bad timestamp {ts:?}")))?;
        let payload: Value = serde_json::from_str(payload).map_err(|e| bad(format!("bad payload: {e}")))?;
        let actor: Actor = payload
            .get("actor")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("payload missing actor".into()))?
            .parse()
            .map_err(bad)?;
        let delta = payload.get("delta").cloned().unwrap_or(Value::Null);
        let event: Event = serde_json::from_value(json!({ "kind": kind, "delta": delta }))
            .map_err(|e| bad(format!("bad {kind} event: {e}")))?;
        Ok(EventRecord {
            sequence,
            timestamp: Timestamp(timestamp),
            actor,
            event,
        })
    }
}

/// Parse a whole log. Sequence numbers must run 1, 2, 3, … without gaps.
pub fn parse_log(text: &str) -> Result<Vec<EventRecord>, LogParseError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = EventRecord::parse_line(line, i + 1)?;
        let expected = records.len() as u64 + 1;
        if record.sequence != expected {
            return Err(LogParseError::Malformed {
                line: i + 1,
                reason: format!("sequence {} where {expected} was expected", record.sequence),
            });
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let rec = EventRecord {
            sequence: 3,
            timestamp: Timestamp(1_700_000_000_123),
            actor: Actor::Player(PlayerId(4)),
            event: Event::RequestCancelled {
                request_id: RequestId(9),
                requester_id: PlayerId(4),
                refund: 20,
            },
        };
        let line = rec.to_line();
        assert_eq!(
            line,
            "3\t1700000000123\trequest-cancelled\t{\"actor\":\"p4\",\"delta\":{\"refund\":20,\"request-id\":9,\"requester-id\":4}}"
        );
        assert_eq!(EventRecord::parse_line(&line, 1).unwrap(), rec);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = parse_log("1\t5\tfriendship-added\t{\"actor\":\"system\",\"delta\":{\"a\":1,\"b\":2}}\nnot a record\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        let err = parse_log("2\t5\tfriendship-added\t{\"actor\":\"system\",\"delta\":{\"a\":1,\"b\":2}}\n").unwrap_err();
        assert!(err.to_string().contains("sequence 2"));
        let err = parse_log("1\t5\tno-such-kind\t{\"actor\":\"system\",\"delta\":{}}\n").unwrap_err();
        assert!(err.to_string().starts_with("line 1:"));
    }
}
