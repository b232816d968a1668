//! Mask-and-fuse matching score.
//!
//! A request ⟨k, S⟩ is turned into a one-hot action mask and a multi-hot
//! attribute mask. The masks select entries of the recognizer output; the
//! selected log-probabilities are fused as
//!
//! ```text
//! score = α · log p_k + (1 − α) / |S| · Σ_{j ∈ S} log p_j
//! ```
//!
//! (natural log, probabilities clamped to `[ε, 1]`), and the performance
//! passes when `score ≥ θ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{RequestConfig, Verdict};

/// Probability vectors produced for one performance: a softmax over the K
/// actions and K-independent multi-label scores for the L attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecognitionOutput {
    pub action_probs: Vec<f64>,
    pub attribute_probs: Vec<f64>,
}

/// Allowed deviation of the action softmax from a total mass of one.
pub const SOFTMAX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecognitionError {
    #[error("expected {expected} action probabilities, got {got}")]
    ActionLength { expected: usize, got: usize },
    #[error("expected {expected} attribute probabilities, got {got}")]
    AttributeLength { expected: usize, got: usize },
    #[error("probability {value} at {which}[{index}] outside [0, 1]")]
    OutOfRange {
        which: &'static str,
        index: usize,
        value: f64,
    },
    #[error("action probabilities sum to {0}, not 1")]
    NotNormalized(f64),
}

impl RecognitionOutput {
    pub fn validate(&self, actions: usize, attributes: usize) -> Result<(), RecognitionError> {
        if self.action_probs.len() != actions {
            return Err(RecognitionError::ActionLength {
                expected: actions,
                got: self.action_probs.len(),
            });
        }
        if self.attribute_probs.len() != attributes {
            return Err(RecognitionError::AttributeLength {
                expected: attributes,
                got: self.attribute_probs.len(),
            });
        }
        for (which, probs) in [("action", &self.action_probs), ("attribute", &self.attribute_probs)] {
            if let Some((index, &value)) = probs
                .iter()
                .enumerate()
                .find(|(_, p)| !(0.0..=1.0).contains(*p))
            {
                return Err(RecognitionError::OutOfRange { which, index, value });
            }
        }
        let total: f64 = self.action_probs.iter().sum();
        if (total - 1.0).abs() > SOFTMAX_TOLERANCE {
            return Err(RecognitionError::NotNormalized(total));
        }
        Ok(())
    }

    /// Index of the largest action probability (lowest index on ties).
    pub fn top_action(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.action_probs.iter().enumerate() {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScoringParams {
    pub alpha: f64,
    pub theta: f64,
    pub epsilon: f64,
}

pub const DEFAULT_ALPHA: f64 = 0.7;
pub const DEFAULT_EPSILON: f64 = 1e-12;

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            theta: 0.5f64.ln(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<(), ScoringError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ScoringError::BadParams(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(ScoringError::BadParams(format!("epsilon {} not in (0, 1)", self.epsilon)));
        }
        if !(self.theta <= 0.0) {
            return Err(ScoringError::BadParams(format!("theta {} must be <= 0", self.theta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MatchResult {
    pub score: f64,
    pub qualified: bool,
    /// `log p_k` after clamping.
    pub action_term: f64,
    /// Mean of `log p_j` over `j ∈ S` after clamping.
    pub attribute_term: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("invalid request config: {0}")]
    Config(String),
    #[error("invalid scoring parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
}

/// Indicator vectors selecting ⟨k, S⟩ from K action and L attribute entries.
pub fn build_masks(
    config: &RequestConfig,
    actions: usize,
    attributes: usize,
) -> Result<(Vec<u8>, Vec<u8>), ScoringError> {
    if config.action_index >= actions {
        return Err(ScoringError::Config(format!(
            "action index {} out of range 0..{actions}",
            config.action_index
        )));
    }
    if config.attribute_set.is_empty() {
        return Err(ScoringError::Config("attribute set is empty".into()));
    }
    if let Some(&bad) = config.attribute_set.iter().find(|&&j| j >= attributes) {
        return Err(ScoringError::Config(format!(
            "attribute index {bad} out of range 0..{attributes}"
        )));
    }
    let action_mask = (0..actions)
        .map(|i| u8::from(i == config.action_index))
        .collect();
    let attribute_mask = (0..attributes)
        .map(|j| u8::from(config.attribute_set.contains(&j)))
        .collect();
    Ok((action_mask, attribute_mask))
}

fn masked_logs<'a>(
    mask: &'a [u8],
    probs: &'a [f64],
    epsilon: f64,
) -> impl Iterator<Item = f64> + 'a {
    mask.iter()
        .zip(probs)
        .filter(|(m, _)| **m == 1)
        .map(move |(_, p)| p.clamp(epsilon, 1.0).ln())
}

pub fn compute_score(
    rec: &RecognitionOutput,
    config: &RequestConfig,
    params: &ScoringParams,
) -> Result<MatchResult, ScoringError> {
    params.validate()?;
    let (actions, attributes) = (rec.action_probs.len(), rec.attribute_probs.len());
    let (action_mask, attribute_mask) = build_masks(config, actions, attributes)?;
    rec.validate(actions, attributes)?;

    let action_term: f64 = masked_logs(&action_mask, &rec.action_probs, params.epsilon).sum();

    // Mean taken as offsets from the first selected term, so equal terms
    // average to exactly that term.
    let mut logs = masked_logs(&attribute_mask, &rec.attribute_probs, params.epsilon);
    let first = logs.next().expect("attribute mask is non-empty");
    let (offsets, count) = logs.fold((0.0, 1usize), |(acc, n), x| (acc + (x - first), n + 1));
    let attribute_term = first + offsets / count as f64;

    // α·a + (1−α)·b written so that a = b gives exactly a.
    let score = action_term + (1.0 - params.alpha) * (attribute_term - action_term);
    Ok(MatchResult {
        score,
        qualified: score >= params.theta,
        action_term,
        attribute_term,
    })
}

pub fn decide(
    rec: &RecognitionOutput,
    config: &RequestConfig,
    params: &ScoringParams,
) -> Result<Verdict, ScoringError> {
    let result = compute_score(rec, config, params)?;
    Ok(if result.qualified { Verdict::Pass } else { Verdict::Fail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lia_oracle::fused_score;
    use proptest::prelude::*;

    fn rec(actions: Vec<f64>, attributes: Vec<f64>) -> RecognitionOutput {
        RecognitionOutput {
            action_probs: actions,
            attribute_probs: attributes,
        }
    }

    #[test]
    fn masks_are_indicators() {
        let (a, _) = build_masks(&RequestConfig::new(2, [0]), 5, 1).unwrap();
        assert_eq!(a, vec![0, 0, 1, 0, 0]);
        let (_, b) = build_masks(&RequestConfig::new(0, [1, 3]), 1, 5).unwrap();
        assert_eq!(b, vec![0, 1, 0, 1, 0]);
        let (a, _) = build_masks(&RequestConfig::new(0, [0]), 1, 1).unwrap();
        assert_eq!(a, vec![1]);
    }

    #[test]
    fn masks_reject_invalid_configs() {
        assert!(build_masks(&RequestConfig::new(5, [0]), 5, 3).is_err());
        assert!(build_masks(&RequestConfig::new(0, []), 5, 3).is_err());
        assert!(build_masks(&RequestConfig::new(0, [3]), 5, 3).is_err());
    }

    #[test]
    fn perfect_recognition_scores_zero() {
        let r = rec(vec![0.0, 0.0, 1.0, 0.0, 0.0], vec![0.3, 1.0, 0.2, 1.0]);
        let m = compute_score(&r, &RequestConfig::new(2, [1, 3]), &ScoringParams::default()).unwrap();
        assert_eq!(m.score, 0.0);
        assert!(m.qualified);
    }

    #[test]
    fn worked_example_matches_oracle() {
        let r = rec(vec![0.05, 0.05, 0.8, 0.05, 0.05], vec![0.5, 0.9, 0.5, 0.6, 0.5]);
        let cfg = RequestConfig::new(2, [1, 3]);
        let m = compute_score(&r, &cfg, &ScoringParams::default()).unwrap();
        let expected = fused_score(0.7, 0.8, &[0.9, 0.6]);
        assert!((m.score - expected).abs() < 1e-9, "{} vs {}", m.score, expected);
        // Frozen from the arbitrary-precision oracle.
        assert!((m.score - (-0.248_628_406_833_519_4)).abs() < 1e-9);
    }

    #[test]
    fn all_equal_probabilities_collapse_to_log_p() {
        for tenth in 1..=9 {
            let p = tenth as f64 / 10.0;
            let others = (1.0 - p) / 4.0;
            let mut actions = vec![others; 5];
            actions[1] = p;
            let r = rec(actions, vec![p; 12]);
            for alpha in [0.1, 0.5, 0.7, 0.95] {
                let params = ScoringParams { alpha, ..Default::default() };
                let m = compute_score(&r, &RequestConfig::new(1, [0, 3, 7, 10]), &params).unwrap();
                assert_eq!(m.score, p.ln());
            }
        }
    }

    #[test]
    fn threshold_boundaries() {
        let params = ScoringParams { theta: -0.6931, ..Default::default() };
        let perfect = rec(vec![1.0, 0.0], vec![1.0]);
        assert_eq!(decide(&perfect, &RequestConfig::new(0, [0]), &params).unwrap(), Verdict::Pass);

        // Score exactly log 0.5 at θ = log 0.5 passes (inclusive boundary).
        let half = rec(vec![0.5, 0.5], vec![0.5]);
        let m = compute_score(&half, &RequestConfig::new(0, [0]), &ScoringParams::default()).unwrap();
        assert_eq!(m.score, 0.5f64.ln());
        assert_eq!(decide(&half, &RequestConfig::new(0, [0]), &ScoringParams::default()).unwrap(), Verdict::Pass);

        // Just below θ fails.
        let p = (-0.6932f64).exp();
        let below = rec(vec![p, 1.0 - p], vec![p]);
        let m = compute_score(&below, &RequestConfig::new(0, [0]), &params).unwrap();
        assert!((m.score + 0.6932).abs() < 1e-12);
        assert_eq!(decide(&below, &RequestConfig::new(0, [0]), &params).unwrap(), Verdict::Fail);
    }

    #[test]
    fn zero_probability_is_clamped() {
        let r = rec(vec![0.0, 1.0], vec![0.0]);
        let m = compute_score(&r, &RequestConfig::new(0, [0]), &ScoringParams::default()).unwrap();
        assert!(m.score.is_finite());
        assert!((m.score - 1e-12f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn invalid_recognition_rejected() {
        let r = rec(vec![0.7, 0.5], vec![0.5]);
        assert!(matches!(
            compute_score(&r, &RequestConfig::new(0, [0]), &ScoringParams::default()),
            Err(ScoringError::Recognition(RecognitionError::NotNormalized(_)))
        ));
        let r = rec(vec![1.0, 0.0], vec![1.5]);
        assert!(compute_score(&r, &RequestConfig::new(0, [0]), &ScoringParams::default()).is_err());
    }

    #[test]
    fn bad_params_rejected() {
        let r = rec(vec![1.0], vec![1.0]);
        for params in [
            ScoringParams { alpha: 0.0, ..Default::default() },
            ScoringParams { alpha: 1.0, ..Default::default() },
            ScoringParams { epsilon: 0.0, ..Default::default() },
            ScoringParams { theta: 0.1, ..Default::default() },
        ] {
            assert!(compute_score(&r, &RequestConfig::new(0, [0]), &params).is_err());
        }
    }

    fn softmax_strategy(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, k).prop_map(|raw| {
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        })
    }

    proptest! {
        #[test]
        fn score_is_bounded(
            actions in softmax_strategy(5),
            attrs in prop::collection::vec(0.0f64..=1.0, 12),
            k in 0usize..5,
            s in prop::collection::btree_set(0usize..12, 1..6),
            alpha in 0.01f64..0.99,
        ) {
            let params = ScoringParams { alpha, ..Default::default() };
            let m = compute_score(&rec(actions, attrs), &RequestConfig { action_index: k, attribute_set: s }, &params).unwrap();
            prop_assert!(m.score <= 0.0);
            prop_assert!(m.score >= params.epsilon.ln() - 1e-12);
        }

        #[test]
        fn score_is_monotone(
            actions in softmax_strategy(4),
            attrs in prop::collection::vec(0.01f64..=0.99, 6),
            s in prop::collection::btree_set(0usize..6, 1..4),
            bump in 0.001f64..0.5,
        ) {
            let cfg = RequestConfig { action_index: 0, attribute_set: s.clone() };
            let params = ScoringParams::default();
            let base = compute_score(&rec(actions.clone(), attrs.clone()), &cfg, &params).unwrap().score;

            let mut up = attrs.clone();
            let j = *s.iter().next().unwrap();
            up[j] = (up[j] + bump).min(1.0);
            let raised = compute_score(&rec(actions.clone(), up), &cfg, &params).unwrap().score;
            prop_assert!(raised >= base - 1e-15);

            // Move mass onto the requested action from the others.
            let shift = bump.min(1.0 - actions[0]);
            let mut moved = actions.clone();
            let rest: f64 = actions[1..].iter().sum();
            moved[0] += shift;
            for p in moved.iter_mut().skip(1) {
                *p *= (1.0 - shift / rest).max(0.0);
            }
            let raised = compute_score(&rec(moved, attrs), &cfg, &params).unwrap().score;
            prop_assert!(raised >= base - 1e-15);
        }

        #[test]
        fn attribute_relabeling_is_invisible(
            actions in softmax_strategy(3),
            attrs in prop::collection::vec(0.01f64..=1.0, 6),
            s in prop::collection::btree_set(0usize..6, 1..5),
            perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let params = ScoringParams::default();
            let cfg = RequestConfig { action_index: 1, attribute_set: s.clone() };
            let base = compute_score(&rec(actions.clone(), attrs.clone()), &cfg, &params).unwrap().score;
            let mut permuted = vec![0.0; 6];
            for (old, &new) in perm.iter().enumerate() {
                permuted[new] = attrs[old];
            }
            let cfg2 = RequestConfig { action_index: 1, attribute_set: s.iter().map(|&j| perm[j]).collect() };
            let other = compute_score(&rec(actions, permuted), &cfg2, &params).unwrap().score;
            prop_assert!((base - other).abs() <= 1e-12);
        }
    }
}
