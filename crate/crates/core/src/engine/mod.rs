//! Authoritative game state.
//!
//! Every command validates against the current state, emits one or more
//! [`Event`]s and applies them. State is only ever changed by applying
//! events, so replaying a log through a fresh [`Game`] rebuilds the
//! exact same state.

mod event;
mod leaderboard;
mod ledger;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub use event::{parse_log, Actor, Event, EventRecord, LogParseError};
pub use leaderboard::{rank, LeaderboardEntry};
pub use ledger::{Ledger, LedgerDelta};

use crate::domain::{
    to_canonical, validate_config, Camera, CameraId, ConfigViolation, Friendships, Performance, PerformanceId,
    Player, PlayerId, RequestConfig, RequestId, RequestState, Review, SocialRequest, Timestamp, Verdict,
    Vocabulary,
};
use crate::perception::PresenceCheck;
use crate::scoring::{compute_score, RecognitionOutput, ScoringError, ScoringParams};

pub const INITIAL_ALLOCATION: u64 = 100;
pub const MIN_REWARD: u64 = 1;
pub const MAX_REWARD: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GameConfig {
    pub vocabulary: Vocabulary,
    pub scoring: ScoringParams,
    pub initial_allocation: u64,
    pub min_reward: u64,
    pub max_reward: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            vocabulary: Vocabulary::default(),
            scoring: ScoringParams::default(),
            initial_allocation: INITIAL_ALLOCATION,
            min_reward: MIN_REWARD,
            max_reward: MAX_REWARD,
        }
    }
}

/// How a client should treat a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorClass {
    BadRequest,
    PaymentRequired,
    NotFound,
    Conflict,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("unknown camera {0}")]
    UnknownCamera(CameraId),
    #[error("unknown request {0}")]
    UnknownRequest(RequestId),
    #[error("unknown performance {0}")]
    UnknownPerformance(PerformanceId),
    #[error("camera {0} is already registered")]
    DuplicateCamera(CameraId),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("player {0} already received the initial allocation")]
    AlreadyAllocated(PlayerId),
    #[error("insufficient EP: balance {balance}, reward {reward}")]
    InsufficientEp { balance: u64, reward: u64 },
    #[error("reward {reward} outside {min}..={max}")]
    RewardOutOfBounds { reward: u64, min: u64, max: u64 },
    #[error("invalid request config: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<ConfigViolation>),
    #[error("a request needs at least one camera")]
    NoCameras,
    #[error("request {request} is not open (state {state})")]
    RequestNotOpen { request: RequestId, state: RequestState },
    #[error("camera {camera} is not allowed for request {request}")]
    CameraNotAllowed { request: RequestId, camera: CameraId },
    #[error("{performer} is not a friend of {requester}")]
    NotAFriend { performer: PlayerId, requester: PlayerId },
    #[error("presence check failed (within radius: {within_radius}, in zone: {in_zone})")]
    PresenceFailed { within_radius: bool, in_zone: bool },
    #[error("{0} is not the requester")]
    NotRequester(PlayerId),
    #[error("wrong state: {0}")]
    WrongState(String),
    #[error("invalid review: {0}")]
    InvalidReview(String),
    #[error("performance id {0} already used")]
    DuplicatePerformance(PerformanceId),
    #[error("invalid recognition output: {0}")]
    InvalidRecognition(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("replay failed at sequence {sequence}: {reason}")]
    Replay { sequence: u64, reason: String },
}

impl GameError {
    pub fn class(&self) -> ErrorClass {
        use GameError::*;
        match self {
            UnknownPlayer(_) | UnknownCamera(_) | UnknownRequest(_) | UnknownPerformance(_) => ErrorClass::NotFound,
            InsufficientEp { .. } => ErrorClass::PaymentRequired,
            InvalidCamera(_) | RewardOutOfBounds { .. } | InvalidConfig(_) | NoCameras | InvalidReview(_)
            | InvalidRecognition(_) | Scoring(_) | PresenceFailed { .. } => ErrorClass::BadRequest,
            DuplicateCamera(_) | AlreadyAllocated(_) | RequestNotOpen { .. } | CameraNotAllowed { .. }
            | NotAFriend { .. } | NotRequester(_) | WrongState(_) | DuplicatePerformance(_) => ErrorClass::Conflict,
            Replay { .. } => ErrorClass::Unavailable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct PlayerRecord {
    display_name: String,
    medal_count: u64,
    joined_at: Timestamp,
}

/// Everything a performance attempt needs once presence and recognition are known.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub performance_id: Option<PerformanceId>,
    pub performer: PlayerId,
    pub request: RequestId,
    pub camera: CameraId,
    pub presence: PresenceCheck,
    pub recognition: RecognitionOutput,
    pub started_at: Timestamp,
}

/// Full observable state in canonical form; used for replay comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GameSnapshot {
    pub players: Vec<Player>,
    pub cameras: Vec<Camera>,
    pub requests: Vec<SocialRequest>,
    pub performances: Vec<Performance>,
    pub ledger: Ledger,
    pub leaderboard: Vec<LeaderboardEntry>,
    pub last_sequence: u64,
}

#[derive(Debug, Clone)]
pub struct Game {
    config: GameConfig,
    players: BTreeMap<PlayerId, PlayerRecord>,
    friendships: Friendships,
    cameras: BTreeMap<CameraId, Camera>,
    requests: BTreeMap<RequestId, SocialRequest>,
    performances: BTreeMap<PerformanceId, Performance>,
    voided: BTreeSet<PerformanceId>,
    ledger: Ledger,
    log: Vec<EventRecord>,
    next_player: u64,
    next_request: u64,
    next_performance: u64,
}

impl Default for Game {
    fn default() -> Self {
        Self::new(GameConfig::default())
    }
}

impl Game {
    pub fn new(config: GameConfig) -> Self {
        Self {
            config,
            players: BTreeMap::new(),
            friendships: Friendships::new(),
            cameras: BTreeMap::new(),
            requests: BTreeMap::new(),
            performances: BTreeMap::new(),
            voided: BTreeSet::new(),
            ledger: Ledger::default(),
            log: Vec::new(),
            next_player: 1,
            next_request: 1,
            next_performance: 1,
        }
    }

    /// Rebuild a game from its event log.
    pub fn replay(config: GameConfig, records: &[EventRecord]) -> Result<Self, GameError> {
        let mut game = Self::new(config);
        for record in records {
            game.apply_record(record.clone())?;
        }
        Ok(game)
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.config.vocabulary
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.log
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn cameras(&self) -> &BTreeMap<CameraId, Camera> {
        &self.cameras
    }

    pub fn requests(&self) -> impl Iterator<Item = &SocialRequest> {
        self.requests.values()
    }

    pub fn request(&self, id: RequestId) -> Option<&SocialRequest> {
        self.requests.get(&id)
    }

    pub fn performance(&self, id: PerformanceId) -> Option<&Performance> {
        self.performances.get(&id)
    }

    pub fn performances(&self) -> impl Iterator<Item = &Performance> {
        self.performances.values()
    }

    pub fn player_ids(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.players.keys().copied()
    }

    pub fn is_player(&self, id: PlayerId) -> bool {
        self.players.contains_key(&id)
    }

    pub fn are_friends(&self, a: PlayerId, b: PlayerId) -> bool {
        self.friendships.are_friends(a, b)
    }

    pub fn player(&self, id: PlayerId) -> Option<Player> {
        self.players.get(&id).map(|r| Player {
            player_id: id,
            display_name: r.display_name.clone(),
            ep_balance: self.ledger.balance(id),
            medal_count: r.medal_count,
            friend_ids: self.friendships.friends_of(id),
            joined_at: r.joined_at,
        })
    }

    /// Claim a fresh performance id ahead of evaluation.
    pub fn reserve_performance_id(&mut self) -> PerformanceId {
        let id = PerformanceId(self.next_performance);
        self.next_performance += 1;
        id
    }

    // ----- commands -------------------------------------------------------

    pub fn register_player(&mut self, display_name: &str, now: Timestamp) -> PlayerId {
        let player_id = PlayerId(self.next_player);
        self.emit(
            now,
            Actor::System,
            Event::PlayerRegistered {
                player_id,
                display_name: display_name.to_string(),
                joined_at: now,
            },
        );
        player_id
    }

    pub fn allocate_initial(&mut self, player: PlayerId, now: Timestamp) -> Result<LedgerDelta, GameError> {
        self.require_player(player)?;
        if self.ledger.is_allocated(player) {
            return Err(GameError::AlreadyAllocated(player));
        }
        let before = self.ledger.balance(player);
        let amount = self.config.initial_allocation;
        self.emit(now, Actor::System, Event::InitialAllocation { player_id: player, amount });
        Ok(LedgerDelta {
            player_id: player,
            balance_before: before,
            balance_after: before + amount,
        })
    }

    /// Returns false when the two were already friends.
    pub fn add_friendship(&mut self, a: PlayerId, b: PlayerId, now: Timestamp) -> Result<bool, GameError> {
        self.require_player(a)?;
        self.require_player(b)?;
        if a == b {
            return Err(GameError::WrongState("a player cannot befriend themselves".into()));
        }
        if self.friendships.are_friends(a, b) {
            return Ok(false);
        }
        self.emit(now, Actor::System, Event::FriendshipAdded { a, b });
        Ok(true)
    }

    pub fn remove_friendship(&mut self, a: PlayerId, b: PlayerId, now: Timestamp) -> Result<bool, GameError> {
        self.require_player(a)?;
        self.require_player(b)?;
        if !self.friendships.are_friends(a, b) {
            return Ok(false);
        }
        self.emit(now, Actor::System, Event::FriendshipRemoved { a, b });
        Ok(true)
    }

    pub fn register_camera(&mut self, camera: Camera, now: Timestamp) -> Result<(), GameError> {
        camera.validate().map_err(|e| GameError::InvalidCamera(e.to_string()))?;
        if self.cameras.contains_key(&camera.camera_id) {
            return Err(GameError::DuplicateCamera(camera.camera_id));
        }
        self.emit(now, Actor::System, Event::CameraRegistered { camera });
        Ok(())
    }

    pub fn publish_request(
        &mut self,
        requester: PlayerId,
        config: RequestConfig,
        reward: u64,
        allowed_cameras: BTreeSet<CameraId>,
        now: Timestamp,
    ) -> Result<SocialRequest, GameError> {
        self.require_player(requester)?;
        let violations = validate_config(&config, &self.config.vocabulary);
        if !violations.is_empty() {
            return Err(GameError::InvalidConfig(violations));
        }
        let (min, max) = (self.config.min_reward, self.config.max_reward);
        if !(min..=max).contains(&reward) {
            return Err(GameError::RewardOutOfBounds { reward, min, max });
        }
        if allowed_cameras.is_empty() {
            return Err(GameError::NoCameras);
        }
        if let Some(&missing) = allowed_cameras.iter().find(|c| !self.cameras.contains_key(c)) {
            return Err(GameError::UnknownCamera(missing));
        }
        let balance = self.ledger.balance(requester);
        if reward > balance {
            return Err(GameError::InsufficientEp { balance, reward });
        }
        let request = SocialRequest {
            request_id: RequestId(self.next_request),
            requester_id: requester,
            config,
            reward,
            allowed_cameras,
            state: RequestState::Open,
            created_at: now,
            fulfilled_by: None,
        };
        self.emit(now, Actor::Player(requester), Event::RequestPublished { request: request.clone() });
        Ok(request)
    }

    /// Check everything about an attempt that does not depend on recognition.
    pub fn check_attempt(
        &self,
        performer: PlayerId,
        request_id: RequestId,
        camera: CameraId,
    ) -> Result<&SocialRequest, GameError> {
        self.require_player(performer)?;
        let request = self
            .requests
            .get(&request_id)
            .ok_or(GameError::UnknownRequest(request_id))?;
        if !self.cameras.contains_key(&camera) {
            return Err(GameError::UnknownCamera(camera));
        }
        if request.state != RequestState::Open {
            return Err(GameError::RequestNotOpen {
                request: request_id,
                state: request.state,
            });
        }
        if !request.allowed_cameras.contains(&camera) {
            return Err(GameError::CameraNotAllowed {
                request: request_id,
                camera,
            });
        }
        if !self.friendships.are_friends(performer, request.requester_id) {
            return Err(GameError::NotAFriend {
                performer,
                requester: request.requester_id,
            });
        }
        Ok(request)
    }

    /// Score an attempt and record it. A PASS fulfils the request and pays
    /// the escrowed reward to the performer; a FAIL leaves the request open.
    pub fn attempt_performance(&mut self, attempt: Attempt, now: Timestamp) -> Result<Performance, GameError> {
        let request = self.check_attempt(attempt.performer, attempt.request, attempt.camera)?;
        if !attempt.presence.passed() {
            return Err(GameError::PresenceFailed {
                within_radius: attempt.presence.within_radius,
                in_zone: attempt.presence.in_zone,
            });
        }
        let vocab = &self.config.vocabulary;
        attempt
            .recognition
            .validate(vocab.action_count(), vocab.attribute_count())
            .map_err(|e| GameError::InvalidRecognition(e.to_string()))?;
        let result = compute_score(&attempt.recognition, &request.config, &self.config.scoring)?;
        let (request_id, reward) = (request.request_id, request.reward);

        let performance_id = match attempt.performance_id {
            Some(id) if self.performances.contains_key(&id) || self.voided.contains(&id) => {
                return Err(GameError::DuplicatePerformance(id));
            }
            Some(id) => id,
            None => self.reserve_performance_id(),
        };
        let verdict = if result.qualified { Verdict::Pass } else { Verdict::Fail };
        let performance = Performance {
            performance_id,
            request_id,
            performer_id: attempt.performer,
            camera_id: attempt.camera,
            started_at: attempt.started_at,
            recognition: attempt.recognition,
            score: result.score,
            action_term: result.action_term,
            attribute_term: result.attribute_term,
            threshold: self.config.scoring.theta,
            verdict,
            review: None,
        };
        let actor = Actor::Player(attempt.performer);
        self.emit(now, actor, Event::PerformanceRecorded { performance: performance.clone() });
        if verdict == Verdict::Pass {
            self.emit(
                now,
                actor,
                Event::RequestFulfilled {
                    request_id,
                    performance_id,
                    performer_id: attempt.performer,
                    reward,
                },
            );
        }
        Ok(performance)
    }

    /// Log an attempt that could not be evaluated. No state changes.
    pub fn void_attempt(
        &mut self,
        performance_id: PerformanceId,
        performer: PlayerId,
        request: RequestId,
        camera: CameraId,
        reason: &str,
        now: Timestamp,
    ) {
        self.emit(
            now,
            Actor::Player(performer),
            Event::AttemptVoided {
                performance_id,
                request_id: request,
                performer_id: performer,
                camera_id: camera,
                reason: reason.to_string(),
            },
        );
    }

    /// Record the requester's review of the performance that fulfilled
    /// their request and grant them a medal. Returns the new medal count.
    pub fn submit_review(
        &mut self,
        reviewer: PlayerId,
        performance_id: PerformanceId,
        review: Review,
        now: Timestamp,
    ) -> Result<u64, GameError> {
        self.require_player(reviewer)?;
        let performance = self
            .performances
            .get(&performance_id)
            .ok_or(GameError::UnknownPerformance(performance_id))?;
        review.validate().map_err(|e| GameError::InvalidReview(e.to_string()))?;
        let request = &self.requests[&performance.request_id];
        if request.requester_id != reviewer {
            return Err(GameError::NotRequester(reviewer));
        }
        if performance.verdict != Verdict::Pass {
            return Err(GameError::WrongState(format!("{performance_id} did not pass")));
        }
        if request.state != RequestState::Fulfilled || request.fulfilled_by != Some(performance_id) {
            return Err(GameError::WrongState(format!(
                "request {} is {}, not awaiting review of {performance_id}",
                request.request_id, request.state
            )));
        }
        let request_id = request.request_id;
        self.emit(
            now,
            Actor::Player(reviewer),
            Event::ReviewSubmitted {
                performance_id,
                request_id,
                requester_id: reviewer,
                review,
            },
        );
        Ok(self.players[&reviewer].medal_count)
    }

    pub fn cancel_request(
        &mut self,
        requester: PlayerId,
        request_id: RequestId,
        now: Timestamp,
    ) -> Result<LedgerDelta, GameError> {
        self.require_player(requester)?;
        let request = self
            .requests
            .get(&request_id)
            .ok_or(GameError::UnknownRequest(request_id))?;
        if request.requester_id != requester {
            return Err(GameError::NotRequester(requester));
        }
        if request.state != RequestState::Open {
            return Err(GameError::WrongState(format!("request {request_id} is {}", request.state)));
        }
        let refund = self.ledger.escrow(request_id);
        let before = self.ledger.balance(requester);
        self.emit(
            now,
            Actor::Player(requester),
            Event::RequestCancelled {
                request_id,
                requester_id: requester,
                refund,
            },
        );
        Ok(LedgerDelta {
            player_id: requester,
            balance_before: before,
            balance_after: before + refund,
        })
    }

    pub fn leaderboard(&self) -> Vec<LeaderboardEntry> {
        rank(
            self.players
                .iter()
                .map(|(&id, r)| LeaderboardEntry {
                    player_id: id,
                    display_name: r.display_name.clone(),
                    medal_count: r.medal_count,
                    ep_balance: self.ledger.balance(id),
                    joined_at: r.joined_at,
                    rank: 0,
                })
                .collect(),
        )
    }

    pub fn snapshot(&self) -> GameSnapshot {
        GameSnapshot {
            players: self.players.keys().filter_map(|&id| self.player(id)).collect(),
            cameras: self.cameras.values().cloned().collect(),
            requests: self.requests.values().cloned().collect(),
            performances: self.performances.values().cloned().collect(),
            ledger: self.ledger.clone(),
            leaderboard: self.leaderboard(),
            last_sequence: self.log.len() as u64,
        }
    }

    /// Canonical text of [`Game::snapshot`]; identical states give identical bytes.
    pub fn canonical_state(&self) -> String {
        to_canonical(&self.snapshot())
    }

    /// Canonical state after replaying only the first `sequence` records.
    pub fn canonical_state_at(&self, sequence: u64) -> Result<String, GameError> {
        let upto = (sequence as usize).min(self.log.len());
        Ok(Self::replay(self.config.clone(), &self.log[..upto])?.canonical_state())
    }

    // ----- event application ---------------------------------------------

    fn require_player(&self, id: PlayerId) -> Result<(), GameError> {
        if self.players.contains_key(&id) {
            Ok(())
        } else {
            Err(GameError::UnknownPlayer(id))
        }
    }

    fn emit(&mut self, now: Timestamp, actor: Actor, event: Event) {
        let record = EventRecord {
            sequence: self.log.len() as u64 + 1,
            timestamp: now,
            actor,
            event,
        };
        self.apply_record(record)
            .expect("commands only emit events that apply cleanly");
    }

    fn apply_record(&mut self, record: EventRecord) -> Result<(), GameError> {
        let sequence = record.sequence;
        if sequence != self.log.len() as u64 + 1 {
            return Err(GameError::Replay {
                sequence,
                reason: format!("expected sequence {}", self.log.len() + 1),
            });
        }
        self.apply(&record.event)
            .map_err(|reason| GameError::Replay { sequence, reason })?;
        self.log.push(record);
        Ok(())
    }

    fn apply(&mut self, event: &Event) -> Result<(), String> {
        match event {
            Event::PlayerRegistered {
                player_id,
                display_name,
                joined_at,
            } => {
                if self.players.contains_key(player_id) {
                    return Err(format!("{player_id} registered twice"));
                }
                self.players.insert(
                    *player_id,
                    PlayerRecord {
                        display_name: display_name.clone(),
                        medal_count: 0,
                        joined_at: *joined_at,
                    },
                );
                self.ledger.open_account(*player_id);
                self.next_player = self.next_player.max(player_id.0 + 1);
            }
            Event::InitialAllocation { player_id, amount } => {
                self.ledger
                    .mint(*player_id, *amount)
                    .map_err(|_| format!("{player_id} allocated twice"))?;
            }
            Event::FriendshipAdded { a, b } => {
                self.friendships.add(*a, *b);
            }
            Event::FriendshipRemoved { a, b } => {
                self.friendships.remove(*a, *b);
            }
            Event::CameraRegistered { camera } => {
                self.cameras.insert(camera.camera_id, camera.clone());
            }
            Event::RequestPublished { request } => {
                if request.state != RequestState::Open || self.requests.contains_key(&request.request_id) {
                    return Err(format!("bad publication of {}", request.request_id));
                }
                self.ledger
                    .lock(request.requester_id, request.request_id, request.reward)
                    .map_err(|f| format!("escrow lock failed: {f:?}"))?;
                self.requests.insert(request.request_id, request.clone());
                self.next_request = self.next_request.max(request.request_id.0 + 1);
            }
            Event::PerformanceRecorded { performance } => {
                if !self.requests.contains_key(&performance.request_id) {
                    return Err(format!("performance for unknown {}", performance.request_id));
                }
                self.next_performance = self.next_performance.max(performance.performance_id.0 + 1);
                self.performances.insert(performance.performance_id, performance.clone());
            }
            Event::RequestFulfilled {
                request_id,
                performance_id,
                performer_id,
                reward,
            } => {
                let request = self
                    .requests
                    .get_mut(request_id)
                    .ok_or_else(|| format!("unknown {request_id}"))?;
                request.fulfill(*performance_id).map_err(|e| e.to_string())?;
                let delta = self
                    .ledger
                    .release(*request_id, *performer_id)
                    .map_err(|f| format!("escrow release failed: {f:?}"))?;
                if delta.balance_after - delta.balance_before != *reward {
                    return Err(format!("escrow of {request_id} did not equal its reward"));
                }
            }
            Event::ReviewSubmitted {
                performance_id,
                request_id,
                requester_id,
                review,
            } => {
                let request = self
                    .requests
                    .get_mut(request_id)
                    .ok_or_else(|| format!("unknown {request_id}"))?;
                request.mark_reviewed().map_err(|e| e.to_string())?;
                let performance = self
                    .performances
                    .get_mut(performance_id)
                    .ok_or_else(|| format!("unknown {performance_id}"))?;
                performance.review = Some(review.clone());
                let player = self
                    .players
                    .get_mut(requester_id)
                    .ok_or_else(|| format!("unknown {requester_id}"))?;
                player.medal_count += 1;
            }
            Event::RequestCancelled {
                request_id,
                requester_id,
                refund,
            } => {
                let request = self
                    .requests
                    .get_mut(request_id)
                    .ok_or_else(|| format!("unknown {request_id}"))?;
                request.cancel().map_err(|e| e.to_string())?;
                let delta = self
                    .ledger
                    .release(*request_id, *requester_id)
                    .map_err(|f| format!("refund failed: {f:?}"))?;
                if delta.balance_after - delta.balance_before != *refund {
                    return Err(format!("refund of {request_id} does not match escrow"));
                }
            }
            Event::AttemptVoided { performance_id, .. } => {
                self.voided.insert(*performance_id);
                self.next_performance = self.next_performance.max(performance_id.0 + 1);
            }
        }
        Ok(())
    }

    /// Structural invariants that must hold after any sequence of commands.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.ledger.is_conserved() {
            return Err("EP conservation violated".into());
        }
        if !self.friendships.is_symmetric() {
            return Err("friendship graph not symmetric".into());
        }
        let open: BTreeSet<RequestId> = self
            .requests
            .values()
            .filter(|r| r.state == RequestState::Open)
            .map(|r| r.request_id)
            .collect();
        let escrowed: BTreeSet<RequestId> = self.ledger.escrow_entries().keys().copied().collect();
        if open != escrowed {
            return Err("escrow entries do not match OPEN requests".into());
        }
        for r in self.requests.values() {
            if !r.is_consistent() {
                return Err(format!("{} inconsistent fulfilled-by", r.request_id));
            }
            let passes = self
                .performances
                .values()
                .filter(|p| p.request_id == r.request_id && p.verdict == Verdict::Pass)
                .count();
            if passes > 1 {
                return Err(format!("{} has {passes} passing performances", r.request_id));
            }
        }
        for p in self.performances.values() {
            if !p.is_consistent() {
                return Err(format!("{} verdict inconsistent", p.performance_id));
            }
        }
        Ok(())
    }
}
