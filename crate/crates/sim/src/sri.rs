//! Synthetic questionnaire answers before and after the study.

use std::collections::BTreeMap;

use lia_core::analysis::SriRow;
use lia_core::PlayerId;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::scenario::SriParams;
use crate::world::FriendGraph;

/// Unordered pair key.
pub fn pair(a: PlayerId, b: PlayerId) -> (PlayerId, PlayerId) {
    (a.min(b), a.max(b))
}

fn answer(x: f64) -> u8 {
    x.round().clamp(1.0, 6.0) as u8
}

/// Pre-study answers: every respondent rates `rated_friends` random friends.
/// `ids[i]` is the player id of graph node `i`.
pub fn pre_answers(graph: &FriendGraph, ids: &[PlayerId], params: &SriParams, rng: &mut impl Rng) -> Vec<SriRow> {
    let noise = Normal::new(0.0, params.answer_sd).expect("validated sd");
    let mut rows = Vec::new();
    for p in 0..graph.n {
        let friends = graph.friends_of(p);
        let picked = sample(rng, friends.len(), params.rated_friends.min(friends.len()));
        let mut picked: Vec<usize> = picked.into_iter().map(|i| friends[i]).collect();
        picked.sort_unstable();
        for f in picked {
            let close = graph.is_close(p, f);
            let base = if close { params.close_baseline } else { params.non_close_baseline };
            let answers = std::array::from_fn(|_| answer(base + noise.sample(rng)));
            rows.push(SriRow {
                player_id: ids[p],
                friend_id: ids[f],
                close,
                answers,
            });
        }
    }
    rows
}

/// Post-study answers: each pre answer shifted by `u · interactions` plus noise.
pub fn post_answers(
    pre: &[SriRow],
    interactions: &BTreeMap<(PlayerId, PlayerId), u64>,
    params: &SriParams,
    rng: &mut impl Rng,
) -> Vec<SriRow> {
    let noise = Normal::new(0.0, params.post_noise_sd).expect("validated sd");
    pre.iter()
        .map(|row| {
            let n = interactions.get(&pair(row.player_id, row.friend_id)).copied().unwrap_or(0);
            let uplift = params.uplift_per_interaction * n as f64;
            SriRow {
                answers: row.answers.map(|q| answer(q as f64 + uplift + noise.sample(rng))),
                ..row.clone()
            }
        })
        .collect()
}
