use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::collections::BTreeMap;

use crate::domain::{BoundingBox, CameraId, PerformanceId, RequestConfig};
use crate::scoring::RecognitionOutput;

/// Smallest peakedness offset. Keeps the winning entry strictly ahead of the
/// runner-up even when `u^c` underflows.
const MIN_MARGIN: f64 = 1e-9;

/// What a simulated camera sees during an attempt: the action actually
/// performed, the performer's true attributes, and the detector's box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulatedScene {
    pub action: usize,
    pub attributes: Vec<bool>,
    pub detected_box: Option<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SyntheticProfile {
    pub ground_truth_action: usize,
    pub ground_truth_attributes: Vec<bool>,
    /// Probability the true action receives the top softmax mass.
    pub action_accuracy: f64,
    /// Per-attribute probability of a confident, correct score.
    pub attribute_accuracy: f64,
    /// Peakedness of emitted probabilities; larger is more decisive.
    pub concentration: f64,
    pub rng_seed: u64,
}

impl SyntheticProfile {
    pub fn validate(&self, action_count: usize) -> Result<(), String> {
        if action_count == 0 || self.ground_truth_action >= action_count {
            return Err(format!(
                "ground-truth action {} outside 0..{action_count}",
                self.ground_truth_action
            ));
        }
        for (name, acc) in [("action", self.action_accuracy), ("attribute", self.attribute_accuracy)] {
            if !(0.0..=1.0).contains(&acc) {
                return Err(format!("{name} accuracy {acc} outside [0, 1]"));
            }
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(format!("concentration {} must be positive", self.concentration));
        }
        Ok(())
    }
}

/// Emit one recognizer output for `profile`.
///
/// Each decision (the action and every attribute) is first drawn correct or
/// wrong with the configured accuracy. A correct decision gets a confident
/// score `x = u^(1/c)` that tends to certainty as the concentration `c`
/// grows. A wrong decision is pushed across the boundary by `v = u^c`, which
/// shrinks towards a near-tie as `c` grows. For a fixed seed every relevant
/// probability is therefore non-decreasing in `c`.
pub fn synth_recognize(profile: &SyntheticProfile, action_count: usize) -> RecognitionOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.rng_seed);
    let c = profile.concentration;
    let k = action_count;
    let truth = profile.ground_truth_action;

    let correct = k == 1 || rng.random::<f64>() < profile.action_accuracy;
    let u = 1.0 - rng.random::<f64>();
    let mut actions = vec![0.0; k];
    if correct {
        let x = u.powf(1.0 / c).max(MIN_MARGIN);
        let top = 1.0 / k as f64 + (1.0 - 1.0 / k as f64) * x;
        let rest = if k > 1 { (1.0 - top) / (k - 1) as f64 } else { 0.0 };
        for (i, p) in actions.iter_mut().enumerate() {
            *p = if i == truth { top } else { rest };
        }
        actions[truth] = 1.0 - rest * (k - 1) as f64;
    } else {
        let v = u.powf(c).max(MIN_MARGIN);
        let offset = rng.random_range(1..k);
        let winner = (truth + offset) % k;
        let true_mass = 0.5 * (1.0 - v);
        let others = if k > 2 { 0.5 * v / (k - 2) as f64 } else { 0.0 };
        for (i, p) in actions.iter_mut().enumerate() {
            *p = if i == truth { true_mass } else { others };
        }
        actions[winner] = 1.0 - true_mass - others * k.saturating_sub(2) as f64;
    }

    let attributes = profile
        .ground_truth_attributes
        .iter()
        .map(|&present| {
            let confident = rng.random::<f64>() < profile.attribute_accuracy;
            let u = 1.0 - rng.random::<f64>();
            let mass_on_truth = if confident {
                0.5 + 0.5 * u.powf(1.0 / c).max(MIN_MARGIN)
            } else {
                0.5 - 0.5 * u.powf(c).max(MIN_MARGIN)
            };
            let p = if present { mass_on_truth } else { 1.0 - mass_on_truth };
            p.clamp(0.0, 1.0)
        })
        .collect();

    RecognitionOutput {
        action_probs: actions,
        attribute_probs: attributes,
    }
}

/// Scene-independent settings of a synthetic recognizer deployment. Each
/// attempt gets its own profile, seeded from the deployment seed, the
/// performance id and the camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecognizerSettings {
    pub action_accuracy: f64,
    pub attribute_accuracy: f64,
    pub concentration: f64,
    pub seed: u64,
    /// Added to both accuracies for attempts seen by that camera, then
    /// clamped to [0, 1].
    #[serde(default)]
    pub camera_offsets: BTreeMap<CameraId, f64>,
}

impl Default for RecognizerSettings {
    fn default() -> Self {
        Self {
            action_accuracy: CALIBRATED_ACTION_ACCURACY,
            attribute_accuracy: CALIBRATED_ATTRIBUTE_ACCURACY,
            concentration: CALIBRATED_CONCENTRATION,
            seed: 0,
            camera_offsets: BTreeMap::new(),
        }
    }
}

/// Settings produced by calibrating against the field-study rates
/// (action match 0.903, attribute match 0.659, pass rate 0.769).
pub const CALIBRATED_ACTION_ACCURACY: f64 = 0.903;
pub const CALIBRATED_ATTRIBUTE_ACCURACY: f64 = 0.659;
pub const CALIBRATED_CONCENTRATION: f64 = 1.881;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RecognizerSettings {
    pub fn validate(&self) -> Result<(), String> {
        for (name, acc) in [("action", self.action_accuracy), ("attribute", self.attribute_accuracy)] {
            if !(0.0..=1.0).contains(&acc) {
                return Err(format!("{name} accuracy {acc} outside [0, 1]"));
            }
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(format!("concentration {} must be positive", self.concentration));
        }
        if let Some((cam, off)) = self.camera_offsets.iter().find(|(_, o)| !o.is_finite()) {
            return Err(format!("offset {off} for {cam} is not finite"));
        }
        Ok(())
    }

    pub fn profile_for(&self, scene: &SimulatedScene, performance: PerformanceId, camera: CameraId) -> SyntheticProfile {
        let offset = self.camera_offsets.get(&camera).copied().unwrap_or(0.0);
        let seed = splitmix64(splitmix64(self.seed ^ performance.0.rotate_left(17)) ^ camera.0);
        SyntheticProfile {
            ground_truth_action: scene.action,
            ground_truth_attributes: scene.attributes.clone(),
            action_accuracy: (self.action_accuracy + offset).clamp(0.0, 1.0),
            attribute_accuracy: (self.attribute_accuracy + offset).clamp(0.0, 1.0),
            concentration: self.concentration,
            rng_seed: seed,
        }
    }

    pub fn recognize(
        &self,
        scene: &SimulatedScene,
        performance: PerformanceId,
        camera: CameraId,
        action_count: usize,
    ) -> Result<RecognitionOutput, String> {
        let profile = self.profile_for(scene, performance, camera);
        profile.validate(action_count)?;
        Ok(synth_recognize(&profile, action_count))
    }
}

impl SimulatedScene {
    /// A performer who does exactly what the request asks and has exactly
    /// the requested attributes.
    pub fn faithful(config: &RequestConfig, attribute_count: usize, detected_box: Option<BoundingBox>) -> Self {
        Self {
            action: config.action_index,
            attributes: (0..attribute_count).map(|j| config.attribute_set.contains(&j)).collect(),
            detected_box,
        }
    }
}
