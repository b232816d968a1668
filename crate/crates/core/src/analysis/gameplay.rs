use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::mean_sd;
use crate::domain::{PlayerId, Verdict};
use crate::engine::{parse_log, Event, EventRecord, LogParseError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GameplayStats {
    pub performance_count: u64,
    pub pass_count: u64,
    pub pass_rate: Option<f64>,
    pub medal_total: u64,
    pub medal_holders: u64,
    pub top_medals: u64,
    pub review_count: u64,
    pub review_score_mean: Option<f64>,
    pub review_score_sd: Option<f64>,
    pub attribute_confirm_rate: Option<f64>,
    pub action_confirm_rate: Option<f64>,
}

/// Folds events one at a time; feeding it a whole log gives the same
/// result as [`gameplay_stats`].
#[derive(Debug, Clone, Default)]
pub struct GameplayAccumulator {
    performances: u64,
    passes: u64,
    medals: BTreeMap<PlayerId, u64>,
    scores: Vec<f64>,
    attribute_confirmed: u64,
    action_confirmed: u64,
}

impl GameplayAccumulator {
    pub fn observe(&mut self, event: &Event) {
        match event {
            Event::PerformanceRecorded { performance } => {
                self.performances += 1;
                if performance.verdict == Verdict::Pass {
                    self.passes += 1;
                }
            }
            Event::ReviewSubmitted {
                requester_id, review, ..
            } => {
                // The medal goes to the requester whose request was fulfilled.
                *self.medals.entry(*requester_id).or_insert(0) += 1;
                self.scores.push(review.overall_score as f64);
                self.attribute_confirmed += review.attribute_confirmed as u64;
                self.action_confirmed += review.action_confirmed as u64;
            }
            _ => {}
        }
    }

    pub fn finish(&self) -> GameplayStats {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let reviews = self.scores.len() as u64;
        let (mean, sd) = match mean_sd(&self.scores) {
            Some((m, sd)) => (Some(m), sd),
            None => (None, None),
        };
        GameplayStats {
            performance_count: self.performances,
            pass_count: self.passes,
            pass_rate: ratio(self.passes, self.performances),
            medal_total: self.medals.values().sum(),
            medal_holders: self.medals.values().filter(|m| **m > 0).count() as u64,
            top_medals: self.medals.values().copied().max().unwrap_or(0),
            review_count: reviews,
            review_score_mean: mean,
            review_score_sd: sd,
            attribute_confirm_rate: ratio(self.attribute_confirmed, reviews),
            action_confirm_rate: ratio(self.action_confirmed, reviews),
        }
    }
}

pub fn gameplay_stats_from_records(records: &[EventRecord]) -> GameplayStats {
    let mut acc = GameplayAccumulator::default();
    for r in records {
        acc.observe(&r.event);
    }
    acc.finish()
}

/// Statistics straight from the text of an event log.
pub fn gameplay_stats(log: &str) -> Result<GameplayStats, LogParseError> {
    Ok(gameplay_stats_from_records(&parse_log(log)?))
}
