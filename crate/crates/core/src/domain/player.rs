use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::{PlayerId, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Player {
    pub player_id: PlayerId,
    pub display_name: String,
    pub ep_balance: u64,
    pub medal_count: u64,
    pub friend_ids: BTreeSet<PlayerId>,
    pub joined_at: Timestamp,
}

/// Undirected friendship graph. Both directions are always stored together.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Friendships {
    adjacency: BTreeMap<PlayerId, BTreeSet<PlayerId>>,
}

impl Friendships {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false for self-loops and already-present edges.
    pub fn add(&mut self, a: PlayerId, b: PlayerId) -> bool {
        if a == b {
            return false;
        }
        let added = self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
        added
    }

    pub fn remove(&mut self, a: PlayerId, b: PlayerId) -> bool {
        let removed = self.adjacency.get_mut(&a).is_some_and(|s| s.remove(&b));
        if let Some(s) = self.adjacency.get_mut(&b) {
            s.remove(&a);
        }
        removed
    }

    pub fn are_friends(&self, a: PlayerId, b: PlayerId) -> bool {
        self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
    }

    pub fn friends_of(&self, player: PlayerId) -> BTreeSet<PlayerId> {
        self.adjacency.get(&player).cloned().unwrap_or_default()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency
            .iter()
            .all(|(a, fs)| fs.iter().all(|b| self.are_friends(*b, *a)))
    }
}
