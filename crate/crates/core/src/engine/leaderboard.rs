use serde::{Deserialize, Serialize};
use std::cmp::Reverse;

use crate::domain::{PlayerId, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LeaderboardEntry {
    pub player_id: PlayerId,
    pub display_name: String,
    pub medal_count: u64,
    pub ep_balance: u64,
    pub joined_at: Timestamp,
    pub rank: usize,
}

/// Medals first, then EP, then earlier join time. Player id settles the
/// (practically impossible) case of identical join times so the order is total.
pub fn rank(mut entries: Vec<LeaderboardEntry>) -> Vec<LeaderboardEntry> {
    entries.sort_by_key(|e| {
        (
            Reverse(e.medal_count),
            Reverse(e.ep_balance),
            e.joined_at,
            e.player_id,
        )
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(id: u64, medals: u64, ep: u64, joined: i64) -> LeaderboardEntry {
        LeaderboardEntry {
            player_id: PlayerId(id),
            display_name: format!("player {id}"),
            medal_count: medals,
            ep_balance: ep,
            joined_at: Timestamp(joined),
            rank: 0,
        }
    }

    #[test]
    fn medals_beat_ep() {
        let ranked = rank(vec![entry(2, 5, 500, 0), entry(1, 31, 10, 0)]);
        assert_eq!(ranked[0].player_id, PlayerId(1));
        assert_eq!(ranked[0].rank, 1);
        assert_eq!(ranked[1].rank, 2);
    }

    #[test]
    fn ep_breaks_medal_ties() {
        let ranked = rank(vec![entry(1, 3, 50, 0), entry(2, 3, 80, 0)]);
        assert_eq!(ranked[0].player_id, PlayerId(2));
    }

    #[test]
    fn join_time_breaks_full_ties() {
        let ranked = rank(vec![entry(1, 3, 50, 20), entry(2, 3, 50, 10)]);
        assert_eq!(ranked[0].player_id, PlayerId(2));
    }

    proptest! {
        #[test]
        fn order_is_total_and_top_is_ep_shift_invariant(
            raw in prop::collection::vec((0u64..5, 0u64..50, 0i64..5), 1..30),
            shift in 0u64..1000,
        ) {
            let entries: Vec<_> = raw.iter().enumerate().map(|(i, (m, e, j))| entry(i as u64, *m, *e, *j)).collect();
            let ranked = rank(entries.clone());
            prop_assert_eq!(ranked.len(), entries.len());
            for w in ranked.windows(2) {
                let a = (Reverse(w[0].medal_count), Reverse(w[0].ep_balance), w[0].joined_at, w[0].player_id);
                let b = (Reverse(w[1].medal_count), Reverse(w[1].ep_balance), w[1].joined_at, w[1].player_id);
                prop_assert!(a < b);
            }
            let shifted = rank(entries.into_iter().map(|mut e| { e.ep_balance += shift; e }).collect());
            prop_assert_eq!(shifted[0].player_id, ranked[0].player_id);
        }
    }
}
