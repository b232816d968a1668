use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use super::{CameraId, DomainError, PerformanceId, PlayerId, RequestId, Timestamp, Vocabulary};
use crate::scoring::RecognitionOutput;

/// What a request asks for: one body action and a non-empty set of attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RequestConfig {
    pub action_index: usize,
    pub attribute_set: BTreeSet<usize>,
}

impl RequestConfig {
    pub fn new(action_index: usize, attributes: impl IntoIterator<Item = usize>) -> Self {
        Self {
            action_index,
            attribute_set: attributes.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "violation")]
pub enum ConfigViolation {
    ActionOutOfRange { index: usize, count: usize },
    EmptyAttributeSet,
    AttributeOutOfRange { index: usize, count: usize },
    ExclusiveGroupConflict { group: usize, members: Vec<usize> },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ActionOutOfRange { index, count } => {
                write!(f, "action index out of range ({index} not in 0..{count})")
            }
            Self::EmptyAttributeSet => write!(f, "attribute set is empty"),
            Self::AttributeOutOfRange { index, count } => {
                write!(f, "attribute index out of range ({index} not in 0..{count})")
            }
            Self::ExclusiveGroupConflict { group, members } => {
                write!(f, "exclusive group conflict (group {group}: {members:?})")
            }
        }
    }
}

/// Every invariant the config violates against `vocab`; empty means valid.
pub fn validate_config(config: &RequestConfig, vocab: &Vocabulary) -> Vec<ConfigViolation> {
    let mut violations = Vec::new();
    let action_count = vocab.action_count();
    if config.action_index >= action_count {
        violations.push(ConfigViolation::ActionOutOfRange {
            index: config.action_index,
            count: action_count,
        });
    }
    if config.attribute_set.is_empty() {
        violations.push(ConfigViolation::EmptyAttributeSet);
    }
    let attribute_count = vocab.attribute_count();
    for &index in &config.attribute_set {
        if index >= attribute_count {
            violations.push(ConfigViolation::AttributeOutOfRange {
                index,
                count: attribute_count,
            });
        }
    }
    for (group, members) in vocab.attributes.exclusive_groups().iter().enumerate() {
        let chosen: Vec<usize> = members
            .iter()
            .copied()
            .filter(|m| config.attribute_set.contains(m))
            .collect();
        if chosen.len() > 1 {
            violations.push(ConfigViolation::ExclusiveGroupConflict {
                group,
                members: chosen,
            });
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RequestState {
    Open,
    Fulfilled,
    Reviewed,
    Cancelled,
}

impl RequestState {
    pub fn can_transition_to(self, next: RequestState) -> bool {
        use RequestState::*;
        matches!(
            (self, next),
            (Open, Fulfilled) | (Fulfilled, Reviewed) | (Open, Cancelled)
        )
    }
}

impl fmt::Display for RequestState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Open => "OPEN",
            Self::Fulfilled => "FULFILLED",
            Self::Reviewed => "REVIEWED",
            Self::Cancelled => "CANCELLED",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("request cannot move from {from} to {to}")]
pub struct TransitionError {
    pub from: RequestState,
    pub to: RequestState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SocialRequest {
    pub request_id: RequestId,
    pub requester_id: PlayerId,
    pub config: RequestConfig,
    pub reward: u64,
    pub allowed_cameras: BTreeSet<CameraId>,
    pub state: RequestState,
    pub created_at: Timestamp,
    pub fulfilled_by: Option<PerformanceId>,
}

impl SocialRequest {
    fn transition(&mut self, to: RequestState) -> Result<(), TransitionError> {
        if !self.state.can_transition_to(to) {
            return Err(TransitionError { from: self.state, to });
        }
        self.state = to;
        Ok(())
    }

    pub fn fulfill(&mut self, performance: PerformanceId) -> Result<(), TransitionError> {
        self.transition(RequestState::Fulfilled)?;
        self.fulfilled_by = Some(performance);
        Ok(())
    }

    pub fn mark_reviewed(&mut self) -> Result<(), TransitionError> {
        self.transition(RequestState::Reviewed)
    }

    pub fn cancel(&mut self) -> Result<(), TransitionError> {
        self.transition(RequestState::Cancelled)
    }

    /// `fulfilled-by` is set exactly in the FULFILLED and REVIEWED states.
    pub fn is_consistent(&self) -> bool {
        let needs_fulfiller = matches!(self.state, RequestState::Fulfilled | RequestState::Reviewed);
        needs_fulfiller == self.fulfilled_by.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Review {
    pub overall_score: u8,
    pub attribute_confirmed: bool,
    pub action_confirmed: bool,
    pub reviewed_at: Timestamp,
}

impl Review {
    pub fn new(
        overall_score: u8,
        attribute_confirmed: bool,
        action_confirmed: bool,
        reviewed_at: Timestamp,
    ) -> Result<Self, DomainError> {
        let review = Self {
            overall_score,
            attribute_confirmed,
            action_confirmed,
            reviewed_at,
        };
        review.validate()?;
        Ok(review)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if (1..=5).contains(&self.overall_score) {
            Ok(())
        } else {
            Err(DomainError::ReviewScoreOutOfRange(self.overall_score))
        }
    }
}

/// One evaluated attempt at a request. The threshold in force and the two
/// fused terms are kept so the verdict can be explained and re-checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Performance {
    pub performance_id: PerformanceId,
    pub request_id: RequestId,
    pub performer_id: PlayerId,
    pub camera_id: CameraId,
    pub started_at: Timestamp,
    pub recognition: RecognitionOutput,
    pub score: f64,
    pub action_term: f64,
    pub attribute_term: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub review: Option<Review>,
}

impl Performance {
    pub fn is_consistent(&self) -> bool {
        let pass = self.score >= self.threshold;
        (pass == (self.verdict == Verdict::Pass))
            && (self.review.is_none() || self.verdict == Verdict::Pass)
            && self.score <= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{from_canonical, to_canonical};
    use proptest::prelude::*;

    fn vocab() -> Vocabulary {
        Vocabulary::default()
    }

    #[test]
    fn valid_config_has_no_violations() {
        assert!(validate_config(&RequestConfig::new(2, [1, 3]), &vocab()).is_empty());
    }

    #[test]
    fn action_out_of_range() {
        let v = validate_config(&RequestConfig::new(5, [1]), &vocab());
        assert_eq!(v, vec![ConfigViolation::ActionOutOfRange { index: 5, count: 5 }]);
        assert!(v[0].to_string().starts_with("action index out of range"));
    }

    #[test]
    fn gender_conflict_and_empty_set() {
        let v = validate_config(&RequestConfig::new(0, [0, 1]), &vocab());
        assert_eq!(
            v,
            vec![ConfigViolation::ExclusiveGroupConflict { group: 0, members: vec![0, 1] }]
        );
        assert!(v[0].to_string().starts_with("exclusive group conflict"));
        let v = validate_config(&RequestConfig::new(9, []), &vocab());
        assert_eq!(v.len(), 2);
        assert!(v.contains(&ConfigViolation::EmptyAttributeSet));
    }

    #[test]
    fn independent_attributes_combine() {
        assert!(validate_config(&RequestConfig::new(1, [0, 2, 6, 9, 10, 11]), &vocab()).is_empty());
        let v = validate_config(&RequestConfig::new(1, [12]), &vocab());
        assert_eq!(v, vec![ConfigViolation::AttributeOutOfRange { index: 12, count: 12 }]);
    }

    #[test]
    fn review_score_range() {
        assert!(Review::new(5, true, true, Timestamp(0)).is_ok());
        assert!(Review::new(0, true, true, Timestamp(0)).is_err());
        assert!(Review::new(6, true, true, Timestamp(0)).is_err());
    }

    fn open_request() -> SocialRequest {
        SocialRequest {
            request_id: RequestId(1),
            requester_id: PlayerId(1),
            config: RequestConfig::new(0, [1]),
            reward: 10,
            allowed_cameras: [CameraId(1), CameraId(2)].into(),
            state: RequestState::Open,
            created_at: Timestamp(5),
            fulfilled_by: None,
        }
    }

    #[test]
    fn canonical_encoding_uses_spec_field_names() {
        let text = to_canonical(&open_request());
        assert!(text.contains("\"request-id\":1"));
        assert!(text.contains("\"allowed-cameras\":[1,2]"));
        assert!(text.contains("\"state\":\"OPEN\""));
        assert_eq!(from_canonical::<SocialRequest>(&text).unwrap(), open_request());
    }

    const ALL_STATES: [RequestState; 4] = [
        RequestState::Open,
        RequestState::Fulfilled,
        RequestState::Reviewed,
        RequestState::Cancelled,
    ];

    proptest! {
        #[test]
        fn state_machine_only_follows_declared_edges(steps in prop::collection::vec(0usize..3, 0..20)) {
            let mut req = open_request();
            for (n, step) in steps.into_iter().enumerate() {
                let before = req.state;
                let target = [RequestState::Fulfilled, RequestState::Reviewed, RequestState::Cancelled][step];
                let result = match target {
                    RequestState::Fulfilled => req.fulfill(PerformanceId(n as u64)),
                    RequestState::Reviewed => req.mark_reviewed(),
                    _ => req.cancel(),
                };
                prop_assert_eq!(result.is_ok(), before.can_transition_to(target));
                if result.is_err() {
                    prop_assert_eq!(req.state, before);
                }
                prop_assert!(req.is_consistent());
            }
        }

        #[test]
        fn transition_table_is_exactly_three_edges(a in 0usize..4, b in 0usize..4) {
            let (from, to) = (ALL_STATES[a], ALL_STATES[b]);
            let expected = matches!((a, b), (0, 1) | (1, 2) | (0, 3));
            prop_assert_eq!(from.can_transition_to(to), expected);
        }

        #[test]
        fn config_round_trips(k in 0usize..10, s in prop::collection::btree_set(0usize..20, 0..6)) {
            let cfg = RequestConfig { action_index: k, attribute_set: s };
            let back: RequestConfig = from_canonical(&to_canonical(&cfg)).unwrap();
            prop_assert_eq!(back, cfg);
        }

        #[test]
        fn performance_round_trips_bit_identically(
            probs in prop::collection::vec(0.0f64..1.0, 5),
            attrs in prop::collection::vec(0.0f64..1.0, 12),
            score in -30.0f64..=0.0,
            reviewed in any::<bool>(),
        ) {
            let perf = Performance {
                performance_id: PerformanceId(3),
                request_id: RequestId(1),
                performer_id: PlayerId(2),
                camera_id: CameraId(4),
                started_at: Timestamp(1_700_000_000_000),
                recognition: RecognitionOutput { action_probs: probs, attribute_probs: attrs },
                score,
                action_term: score * 0.5,
                attribute_term: score / 3.0,
                threshold: 0.5f64.ln(),
                verdict: Verdict::Pass,
                review: reviewed.then(|| Review::new(4, true, false, Timestamp(9)).unwrap()),
            };
            let text = to_canonical(&perf);
            let back: Performance = from_canonical(&text).unwrap();
            prop_assert_eq!(back.score.to_bits(), perf.score.to_bits());
            prop_assert_eq!(&back, &perf);
            prop_assert_eq!(to_canonical(&back), text);
        }
    }
}
