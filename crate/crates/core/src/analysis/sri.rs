//! Questionnaire datasets: one row per rated friendship.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{positivity, AnalysisError, PairedSample};
use crate::domain::PlayerId;

pub const SRI_HEADER: &str = "player-id\tfriend-id\tclose-flag\tq1\tq2\tq3\tq4\tq5\tq6";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SriRow {
    pub player_id: PlayerId,
    pub friend_id: PlayerId,
    pub close: bool,
    pub answers: [u8; 6],
}

impl SriRow {
    pub fn positivity(&self) -> Result<f64, AnalysisError> {
        positivity(&self.answers)
    }

    pub fn key(&self) -> (PlayerId, PlayerId) {
        (self.player_id, self.friend_id)
    }
}

pub fn write_sri(rows: &[SriRow]) -> String {
    let mut out = String::from(SRI_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}\t{}\t{}", r.player_id.0, r.friend_id.0, r.close as u8);
        for a in r.answers {
            let _ = write!(out, "\t{a}");
        }
        out.push('\n');
    }
    out
}

/// Parse a dataset written by [`write_sri`]. The header line is optional.
pub fn parse_sri(text: &str) -> Result<Vec<SriRow>, AnalysisError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || (i == 0 && line.starts_with("player-id")) {
            continue;
        }
        let bad = |reason: String| AnalysisError::Parse { line: line_no, reason };
        let cols: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if cols.len() != 9 {
            return Err(bad(format!("expected 9 columns, found {}", cols.len())));
        }
        let id = |s: &str| s.parse::<u64>().map(PlayerId).map_err(|_| bad(format!("bad player id {s:?}")));
        let close = match cols[2] {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("bad close flag {other:?}"))),
        };
        let mut answers = [0u8; 6];
        for (k, a) in answers.iter_mut().enumerate() {
            let s = cols[3 + k];
            *a = s.parse().map_err(|_| bad(format!("bad answer {s:?}")))?;
            if !(1..=6).contains(a) {
                return Err(bad(format!("q{} = {a} is outside 1..=6", k + 1)));
            }
        }
        rows.push(SriRow {
            player_id: id(cols[0])?,
            friend_id: id(cols[1])?,
            close,
            answers,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    All,
    Close,
    NonClose,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::All, Group::Close, Group::NonClose];

    pub fn label(self) -> &'static str {
        match self {
            Group::All => "all",
            Group::Close => "close",
            Group::NonClose => "non-close",
        }
    }

    pub fn admits(self, close: bool) -> bool {
        match self {
            Group::All => true,
            Group::Close => close,
            Group::NonClose => !close,
        }
    }
}

/// Align pre and post rows by (player, friend) and collect positivity
/// pairs for one group. The close flag is taken from the pre-game row.
pub fn pair_positivity(pre: &[SriRow], post: &[SriRow], group: Group) -> Result<(Vec<f64>, Vec<f64>), AnalysisError> {
    let mut post_by_key = BTreeMap::new();
    for r in post {
        if post_by_key.insert(r.key(), r).is_some() {
            return Err(AnalysisError::DuplicatePair(r.player_id.0, r.friend_id.0));
        }
    }
    let mut seen = BTreeMap::new();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in pre {
        if seen.insert(r.key(), ()).is_some() {
            return Err(AnalysisError::DuplicatePair(r.player_id.0, r.friend_id.0));
        }
        let Some(after) = post_by_key.get(&r.key()) else {
            return Err(AnalysisError::UnmatchedPair(r.player_id.0, r.friend_id.0));
        };
        if group.admits(r.close) {
            a.push(r.positivity()?);
            b.push(after.positivity()?);
        }
    }
    if seen.len() != post_by_key.len() {
        let extra = post_by_key.keys().find(|k| !seen.contains_key(k)).expect("size mismatch implies an extra key");
        return Err(AnalysisError::UnmatchedPair(extra.0 .0, extra.1 .0));
    }
    Ok((a, b))
}

pub fn paired_sample(pre: &[SriRow], post: &[SriRow], group: Group) -> Result<PairedSample, AnalysisError> {
    let (a, b) = pair_positivity(pre, post, group)?;
    PairedSample::new(a, b)
}
