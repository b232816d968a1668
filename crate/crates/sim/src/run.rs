//! Scripted agents playing a scenario against the HTTP API.
//!
//! A coordinator owns the logical clock. Each simulated day has a publish
//! phase, a number of response rounds and a review phase; within a phase
//! the agents take turns in a seeded random order, each through its own
//! API session.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use lia_core::analysis::{gameplay_stats, write_sri, SriRow};
use lia_core::perception::RecognizerSettings;
use lia_core::{PlayerId, RequestId, Timestamp, Verdict};
use lia_server::api::{LedgerView, NewReview};
use lia_server::backend::Backend;
use lia_server::{App, ManualClock, ServerConfig};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ClientError, Session};
use crate::scenario::{Scenario, ScenarioError};
use crate::sri::{pair, post_answers, pre_answers};
use crate::world::{campus_cameras, random_config, FriendGraph};

/// Logical start of every run (2023-03-06 00:00 UTC).
pub const EPOCH_MS: i64 = 1_678_060_800_000;
pub const DAY_MS: i64 = 86_400_000;
/// Logical time between two consecutive agent actions.
const STEP_MS: i64 = 1_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("server failed to start: {0}")]
    Server(String),
    #[error("EP not conserved after day {day}")]
    NotConserved { day: u32 },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Counts taken from API responses while the run was in progress.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Tally {
    pub requests_published: u64,
    pub performances: u64,
    pub passes: u64,
    pub voided: u64,
    pub reviews: u64,
    pub medals: BTreeMap<PlayerId, u64>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub log: String,
    pub sri_pre: Vec<SriRow>,
    pub sri_post: Vec<SriRow>,
    pub tally: Tally,
    pub ledger: LedgerView,
    pub graph: FriendGraph,
    pub players: Vec<PlayerId>,
    /// Canonical server state at the end of the run, when the server ran in-process.
    pub final_state: Option<String>,
}

/// Run `scenario` against a fresh in-process server on a local port.
pub async fn run_scenario(scenario: &Scenario) -> Result<SimOutput, SimError> {
    scenario.validate()?;
    let clock = Arc::new(ManualClock::new(Timestamp(EPOCH_MS)));
    let recognizer = RecognizerSettings {
        seed: scenario.recognizer.seed ^ scenario.seed.rotate_left(32),
        ..scenario.recognizer.clone()
    };
    let config = ServerConfig {
        backend: Backend::Synthetic(recognizer),
        ..ServerConfig::default()
    };
    let app = App::new(config, clock.clone()).map_err(|e| SimError::Server(e.to_string()))?;
    let (addr, server) = app.spawn_local().await?;
    let result = drive(&format!("http://{addr}"), scenario, Some(&clock)).await;
    server.abort();
    let mut out = result?;
    out.final_state = Some(app.read(|g| g.canonical_state()));
    Ok(out)
}

/// Play `scenario` against the server at `base`. With `clock`, the
/// coordinator also steers the server's logical time.
pub async fn drive(base: &str, scenario: &Scenario, clock: Option<&ManualClock>) -> Result<SimOutput, SimError> {
    scenario.validate()?;
    let tick = |at: Option<i64>| {
        if let Some(c) = clock {
            match at {
                Some(t) => c.set(Timestamp(t)),
                None => {
                    c.advance_millis(STEP_MS);
                }
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let n = scenario.player_count;
    let graph = FriendGraph::generate(n, scenario.friendship_density, scenario.min_friends, scenario.close_fraction, &mut rng);
    let inactive: BTreeSet<usize> = sample(&mut rng, n, scenario.inactive_players).into_iter().collect();

    // Setup: players, friendships, cameras.
    let admin = Session::anonymous(base)?;
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        tick(None);
        ids.push(admin.register(&format!("player-{:02}", i + 1)).await?.player_id);
    }
    let sessions: Vec<Session> = ids.iter().map(|&id| Session::as_player(base, id)).collect::<Result<_, _>>()?;
    for &(a, b, _) in &graph.edges {
        tick(None);
        admin.befriend(ids[a], ids[b]).await?;
    }
    let cameras = campus_cameras(scenario.outdoor_cameras, scenario.indoor_cameras);
    for c in &cameras {
        tick(None);
        admin.add_camera(c).await?;
    }
    let sri_pre = pre_answers(&graph, &ids, &scenario.sri, &mut rng);

    let vocab = lia_core::Vocabulary::default();
    let score_dist = WeightedIndex::new(scenario.review_score_weights).expect("validated weights");
    let mut tally = Tally::default();
    let mut interactions: BTreeMap<(PlayerId, PlayerId), u64> = BTreeMap::new();
    let mut review_decided: BTreeSet<RequestId> = BTreeSet::new();
    let whole = scenario.requests_per_player_per_day.floor() as usize;
    let frac = scenario.requests_per_player_per_day.fract();

    for day in 0..scenario.days {
        tick(Some(EPOCH_MS + day as i64 * DAY_MS + 8 * 3_600_000));

        for p in shuffled(n, &mut rng) {
            let count = whole + usize::from(rng.random_bool(frac));
            for _ in 0..count {
                let config = random_config(&vocab, &mut rng);
                let wanted = rng.random_range(scenario.reward_min..=scenario.reward_max);
                let two = cameras.len() > 1 && rng.random_bool(scenario.two_camera_fraction);
                let allowed: BTreeSet<_> = sample(&mut rng, cameras.len(), if two { 2 } else { 1 })
                    .into_iter()
                    .map(|i| cameras[i].camera_id)
                    .collect();
                let balance = sessions[p].player(ids[p]).await?.ep_balance;
                if balance < scenario.reward_min {
                    continue;
                }
                tick(None);
                sessions[p].publish(config, wanted.min(balance), allowed).await?;
                tally.requests_published += 1;
            }
        }

        for _ in 0..scenario.max_responses_per_day {
            for p in shuffled(n, &mut rng) {
                if inactive.contains(&p) || !rng.random_bool(scenario.response_propensity) {
                    continue;
                }
                let open = sessions[p].requests("OPEN").await?;
                let Some(request) = open.into_iter().find(|r| r.requester_id != ids[p]) else {
                    continue;
                };
                let allowed: Vec<_> = request.allowed_cameras.iter().copied().collect();
                let camera_id = allowed[rng.random_range(0..allowed.len())];
                let camera = cameras.iter().find(|c| c.camera_id == camera_id).expect("registered camera");
                tick(None);
                match sessions[p].perform(request.request_id, camera_id, camera.position).await {
                    Ok(outcome) => {
                        tally.performances += 1;
                        if outcome.performance.verdict == Verdict::Pass {
                            tally.passes += 1;
                        }
                        *interactions.entry(pair(ids[p], request.requester_id)).or_insert(0) += 1;
                    }
                    Err(e) if e.status().is_some_and(|s| s.as_u16() == 503) => tally.voided += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }

        for p in shuffled(n, &mut rng) {
            let fulfilled = sessions[p].requests("FULFILLED").await?;
            for request in fulfilled.into_iter().filter(|r| r.requester_id == ids[p]) {
                if !review_decided.insert(request.request_id) || !rng.random_bool(scenario.review_propensity) {
                    continue;
                }
                let performance_id = request.fulfilled_by.expect("fulfilled request names its performance");
                let perf = sessions[p].performance(performance_id).await?;
                let rec = &perf.recognition;
                let review = NewReview {
                    performance_id,
                    overall_score: score_dist.sample(&mut rng) as u8 + 1,
                    action_confirmed: rec.top_action() == Some(request.config.action_index),
                    attribute_confirmed: request.config.attribute_set.iter().all(|&j| rec.attribute_probs[j] >= 0.5),
                };
                tick(None);
                let medals = sessions[p].review(&review).await?;
                tally.reviews += 1;
                tally.medals.insert(ids[p], medals);
            }
        }

        if !admin.ledger().await?.conserved {
            return Err(SimError::NotConserved { day });
        }
    }

    let sri_post = post_answers(&sri_pre, &interactions, &scenario.sri, &mut rng);
    Ok(SimOutput {
        log: admin.events().await?,
        sri_pre,
        sri_post,
        tally,
        ledger: admin.ledger().await?,
        graph,
        players: ids,
        final_state: None,
    })
}

fn shuffled(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    sample(rng, n, n).into_vec()
}

pub const LOG_NAME: &str = "events.log";
pub const SRI_PRE_NAME: &str = "sri_pre.tsv";
pub const SRI_POST_NAME: &str = "sri_post.tsv";
pub const GAMEPLAY_NAME: &str = "gameplay.json";

/// Write the event log, both questionnaire files and a gameplay summary into `dir`.
pub fn write_outputs(out: &SimOutput, dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(LOG_NAME), &out.log)?;
    std::fs::write(dir.join(SRI_PRE_NAME), write_sri(&out.sri_pre))?;
    std::fs::write(dir.join(SRI_POST_NAME), write_sri(&out.sri_post))?;
    let stats = gameplay_stats(&out.log).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let mut json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    json.push('\n');
    std::fs::write(dir.join(GAMEPLAY_NAME), json)?;
    Ok(())
}
