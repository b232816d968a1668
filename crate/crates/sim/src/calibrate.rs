//! Monte-Carlo measurement and calibration of the synthetic recognizer.
//!
//! Rates are measured over faithful attempts (the performer does what was
//! asked and has the requested attributes):
//! - action match: top-1 action equals the requested action;
//! - attribute match: requested attributes scored on the correct side of 0.5;
//! - pass rate: fused score at or above θ.

use lia_core::domain::Vocabulary;
use lia_core::perception::{RecognizerSettings, SimulatedScene};
use lia_core::scoring::compute_score;
use lia_core::{CameraId, PerformanceId, ScoringParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::random_config;

pub const DEFAULT_TRIALS: usize = 10_000;
/// Lowest and highest concentration searched.
pub const CONCENTRATION_RANGE: (f64, f64) = (1e-3, 1e4);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Rates {
    pub pass_rate: f64,
    pub action_match: f64,
    pub attribute_match: f64,
}

pub type CalibrationTargets = Rates;

impl CalibrationTargets {
    pub fn field_study() -> Self {
        Self {
            pass_rate: 0.769,
            action_match: 0.903,
            attribute_match: 0.659,
        }
    }

    pub fn max_error(&self, other: &Rates) -> f64 {
        [
            (self.pass_rate - other.pass_rate).abs(),
            (self.action_match - other.action_match).abs(),
            (self.attribute_match - other.attribute_match).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("target {name} = {value} must lie in [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("pass rate {target} is unreachable: achievable range is [{low:.4}, {high:.4}] at these accuracies")]
    Infeasible { target: f64, low: f64, high: f64 },
    #[error("need at least one trial")]
    NoTrials,
}

/// Measure the three rates over `trials` faithful attempts. Trial `i` always
/// uses the same request and the same random stream, so measurements at
/// different settings share their randomness.
pub fn measure(
    settings: &RecognizerSettings,
    vocab: &Vocabulary,
    scoring: &ScoringParams,
    trials: usize,
    seed: u64,
) -> Rates {
    let settings = RecognizerSettings {
        seed,
        ..settings.clone()
    };
    let (mut passes, mut action_hits, mut attr_hits, mut attr_total) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let config = random_config(vocab, &mut rng);
        let scene = SimulatedScene::faithful(&config, vocab.attribute_count(), None);
        let out = settings
            .recognize(&scene, PerformanceId(i as u64), CameraId(0), vocab.action_count())
            .expect("validated settings");
        if out.top_action() == Some(config.action_index) {
            action_hits += 1;
        }
        for &j in &config.attribute_set {
            attr_total += 1;
            if out.attribute_probs[j] >= 0.5 {
                attr_hits += 1;
            }
        }
        if compute_score(&out, &config, scoring).expect("valid output").qualified {
            passes += 1;
        }
    }
    let n = trials.max(1) as f64;
    Rates {
        pass_rate: passes as f64 / n,
        action_match: action_hits as f64 / n,
        attribute_match: attr_hits as f64 / attr_total.max(1) as f64,
    }
}

/// Fix the accuracies at their targets and bisect the concentration (in log
/// space) for the pass rate. The pass rate is non-decreasing in the
/// concentration, so a target outside the rates reached at the ends of
/// [`CONCENTRATION_RANGE`] is reported as infeasible.
pub fn calibrate(
    targets: &CalibrationTargets,
    base: &RecognizerSettings,
    vocab: &Vocabulary,
    scoring: &ScoringParams,
    trials: usize,
    seed: u64,
) -> Result<(RecognizerSettings, Rates), CalibrationError> {
    for (name, value) in [
        ("pass-rate", targets.pass_rate),
        ("action-match", targets.action_match),
        ("attribute-match", targets.attribute_match),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(CalibrationError::OutOfRange { name, value });
        }
    }
    if trials == 0 {
        return Err(CalibrationError::NoTrials);
    }
    let with = |c: f64| RecognizerSettings {
        action_accuracy: targets.action_match,
        attribute_accuracy: targets.attribute_match,
        concentration: c,
        ..base.clone()
    };
    let at = |c: f64| measure(&with(c), vocab, scoring, trials, seed);

    let (lo_c, hi_c) = CONCENTRATION_RANGE;
    let (low, high) = (at(lo_c), at(hi_c));
    let slack = 0.5 / trials as f64;
    if targets.pass_rate < low.pass_rate - slack || targets.pass_rate > high.pass_rate + slack {
        return Err(CalibrationError::Infeasible {
            target: targets.pass_rate,
            low: low.pass_rate,
            high: high.pass_rate,
        });
    }

    let (mut lo, mut hi) = (lo_c.ln(), hi_c.ln());
    let mut best = if (low.pass_rate - targets.pass_rate).abs() <= (high.pass_rate - targets.pass_rate).abs() {
        (lo_c, low)
    } else {
        (hi_c, high)
    };
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let rates = at(mid.exp());
        if (rates.pass_rate - targets.pass_rate).abs() < (best.1.pass_rate - targets.pass_rate).abs() {
            best = (mid.exp(), rates);
        }
        if rates.pass_rate < targets.pass_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    Ok((with(best.0), best.1))
}
