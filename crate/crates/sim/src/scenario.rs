use lia_core::perception::RecognizerSettings;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("invalid scenario: {0}")]
pub struct ScenarioError(pub String);

/// Questionnaire model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct SriParams {
    /// Friends rated by every respondent.
    pub rated_friends: usize,
    pub close_baseline: f64,
    pub non_close_baseline: f64,
    /// Spread of a respondent's answers around the baseline.
    pub answer_sd: f64,
    /// Positivity gained per in-game interaction between the pair.
    pub uplift_per_interaction: f64,
    pub post_noise_sd: f64,
}

impl Default for SriParams {
    fn default() -> Self {
        Self {
            rated_friends: 6,
            close_baseline: 4.3,
            non_close_baseline: 3.2,
            answer_sd: 0.8,
            uplift_per_interaction: 0.15,
            post_noise_sd: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Scenario {
    pub player_count: usize,
    /// Players who never answer requests.
    pub inactive_players: usize,
    /// Target fraction of player pairs that are friends.
    pub friendship_density: f64,
    /// Fraction of friendships marked close.
    pub close_fraction: f64,
    pub min_friends: usize,
    pub outdoor_cameras: usize,
    pub indoor_cameras: usize,
    pub days: u32,
    /// Expected requests published per player per day.
    pub requests_per_player_per_day: f64,
    /// Chance an active player answers a request in each response round.
    pub response_propensity: f64,
    pub max_responses_per_day: u32,
    pub reward_min: u64,
    pub reward_max: u64,
    /// Chance a request that was fulfilled gets reviewed.
    pub review_propensity: f64,
    /// Relative frequency of overall scores 1..=5.
    pub review_score_weights: [f64; 5],
    /// Chance a request is published on two cameras instead of one.
    pub two_camera_fraction: f64,
    pub recognizer: RecognizerSettings,
    pub sri: SriParams,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            player_count: 27,
            inactive_players: 2,
            friendship_density: 0.628,
            close_fraction: 0.283,
            min_friends: 6,
            outdoor_cameras: 3,
            indoor_cameras: 2,
            days: 14,
            requests_per_player_per_day: 1.0,
            response_propensity: 0.6,
            max_responses_per_day: 2,
            reward_min: 5,
            reward_max: 20,
            review_propensity: 0.85,
            review_score_weights: [0.06, 0.04, 0.08, 0.29, 0.53],
            two_camera_fraction: 0.3,
            recognizer: RecognizerSettings::default(),
            sri: SriParams::default(),
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError(m));
        for (name, p) in [
            ("friendship-density", self.friendship_density),
            ("close-fraction", self.close_fraction),
            ("response-propensity", self.response_propensity),
            ("review-propensity", self.review_propensity),
            ("two-camera-fraction", self.two_camera_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.player_count < 2 {
            return bad("at least two players are needed".into());
        }
        if self.inactive_players > self.player_count {
            return bad("more inactive players than players".into());
        }
        if self.min_friends >= self.player_count {
            return bad(format!("min-friends {} needs more than {} players", self.min_friends, self.player_count));
        }
        if self.sri.rated_friends > self.min_friends {
            return bad(format!(
                "rated-friends {} exceeds min-friends {}",
                self.sri.rated_friends, self.min_friends
            ));
        }
        if self.outdoor_cameras + self.indoor_cameras == 0 {
            return bad("at least one camera is needed".into());
        }
        if self.reward_min == 0 || self.reward_min > self.reward_max {
            return bad(format!("reward range {}..={} is empty or starts at 0", self.reward_min, self.reward_max));
        }
        if !(self.requests_per_player_per_day >= 0.0 && self.requests_per_player_per_day.is_finite()) {
            return bad("requests-per-player-per-day must be a non-negative number".into());
        }
        if self.review_score_weights.iter().any(|w| !(*w >= 0.0)) || self.review_score_weights.iter().sum::<f64>() <= 0.0 {
            return bad("review-score-weights must be non-negative and not all zero".into());
        }
        for (name, sd) in [("answer-sd", self.sri.answer_sd), ("post-noise-sd", self.sri.post_noise_sd)] {
            if !(sd >= 0.0 && sd.is_finite()) {
                return bad(format!("{name} must be a non-negative number"));
            }
        }
        self.recognizer.validate().map_err(ScenarioError)
    }
}
