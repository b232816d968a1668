//! Route handlers.

use std::collections::BTreeSet;
use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use lia_core::domain::BoundingBox;
use lia_core::engine::{Attempt, LeaderboardEntry, LedgerDelta};
use lia_core::perception::{verify_presence, RecognizerBackendDescriptor, SimulatedScene, PERFORMANCE_WINDOW_MS};
use lia_core::{
    Camera, CameraId, GameError, GeoPoint, Performance, PerformanceId, Player, PlayerId, RequestConfig, RequestId,
    RequestState, Review, SocialRequest,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::backend::EvaluationJob;
use crate::error::ApiError;
use crate::live::{LivePublisher, LiveStatus};
use crate::Shared;

pub const PLAYER_HEADER: &str = "x-player-id";

type AppState = State<Arc<Shared>>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(shared: Arc<Shared>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/players", post(register_player))
        .route("/players/{id}", get(get_player))
        .route("/players/{id}/allocate", post(allocate))
        .route("/friendships", post(add_friendship).delete(remove_friendship))
        .route("/cameras", post(register_camera).get(list_cameras))
        .route("/map", get(map))
        .route("/requests", post(publish_request).get(list_requests))
        .route("/requests/{id}", get(get_request))
        .route("/requests/{id}/cancel", post(cancel_request))
        .route("/performances", post(perform))
        .route("/performances/{id}", get(get_performance))
        .route("/live/{token}", get(live_status))
        .route("/reviews", post(submit_review))
        .route("/leaderboard", get(leaderboard))
        .route("/ledger", get(ledger))
        .route("/events", get(events))
        .with_state(shared)
}

/// JSON body whose rejection uses the API error format.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e| ApiError::BadRequest(e.body_text()))
    }
}

fn parse_id(raw: &str, prefix: &str) -> Option<u64> {
    raw.strip_prefix(prefix).unwrap_or(raw).parse().ok()
}

fn path_id(raw: &str, prefix: &str) -> ApiResult<u64> {
    parse_id(raw, prefix).ok_or_else(|| ApiError::BadRequest(format!("bad id {raw:?}")))
}

/// The calling player, from the `x-player-id` header (`p7` or `7`).
#[derive(Debug, Clone, Copy)]
pub struct Caller(pub PlayerId);

impl<S: Send + Sync> FromRequestParts<S> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, Self::Rejection> {
        let raw = parts
            .headers
            .get(PLAYER_HEADER)
            .ok_or_else(|| ApiError::Unauthenticated(format!("missing {PLAYER_HEADER} header")))?
            .to_str()
            .map_err(|_| ApiError::Unauthenticated(format!("unreadable {PLAYER_HEADER} header")))?;
        parse_id(raw.trim(), "p")
            .map(|n| Caller(PlayerId(n)))
            .ok_or_else(|| ApiError::Unauthenticated(format!("bad player id {raw:?}")))
    }
}

impl Shared {
    fn require_registered(&self, caller: Caller) -> ApiResult<()> {
        if self.read(|g| g.is_player(caller.0)) {
            Ok(())
        } else {
            Err(ApiError::Unauthenticated(format!("unknown player {}", caller.0)))
        }
    }
}

// ----- bodies ---------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NewPlayer {
    pub display_name: String,
    /// Grant the initial EP allocation right away.
    #[serde(default = "yes")]
    pub allocate: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FriendshipBody {
    pub a: PlayerId,
    pub b: PlayerId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Changed {
    pub changed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NewRequest {
    pub config: RequestConfig,
    pub reward: u64,
    pub allowed_cameras: BTreeSet<CameraId>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RequestFilter {
    pub state: Option<RequestState>,
    pub camera: Option<CameraId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NewPerformance {
    pub request_id: RequestId,
    pub camera_id: CameraId,
    pub gps: GeoPoint,
    /// Client-chosen live channel token; one is generated when absent.
    #[serde(default)]
    pub live_token: Option<String>,
    /// What the camera sees. Defaults to a performer standing in the middle
    /// of the detection zone doing exactly what was requested.
    #[serde(default)]
    pub scene: Option<SimulatedScene>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PerformanceOutcome {
    pub performance: Performance,
    pub live_token: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NewReview {
    pub performance_id: PerformanceId,
    pub overall_score: u8,
    pub attribute_confirmed: bool,
    pub action_confirmed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MedalCount {
    pub medal_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MapCamera {
    pub camera_id: CameraId,
    pub position: GeoPoint,
    pub indoor: bool,
    pub open_request_count: usize,
    pub requests: Vec<SocialRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapView {
    pub cameras: Vec<MapCamera>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LedgerView {
    pub balances: BTreeMap<PlayerId, u64>,
    pub escrow: BTreeMap<RequestId, u64>,
    pub mint_total: u64,
    pub total_balances: u64,
    pub total_escrow: u64,
    pub conserved: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Health {
    pub backend: RecognizerBackendDescriptor,
    pub last_sequence: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EventsQuery {
    /// Only records with a larger sequence number.
    pub after: Option<u64>,
}

// ----- handlers -------------------------------------------------------------

async fn health(State(s): AppState) -> Json<Health> {
    let (backend, last_sequence) = s.read(|g| (s.backend.descriptor(g.vocabulary()), g.events().len() as u64));
    Json(Health { backend, last_sequence })
}

async fn register_player(State(s): AppState, Body(body): Body<NewPlayer>) -> ApiResult<impl IntoResponse> {
    let player = s.mutate(|g, now| {
        let id = g.register_player(&body.display_name, now);
        if body.allocate {
            g.allocate_initial(id, now)?;
        }
        Ok(g.player(id).expect("just registered"))
    })?;
    Ok((StatusCode::CREATED, Json(player)))
}

async fn get_player(State(s): AppState, Path(id): Path<String>) -> ApiResult<Json<Player>> {
    let id = PlayerId(path_id(&id, "p")?);
    s.read(|g| g.player(id)).map(Json).ok_or(ApiError::Game(GameError::UnknownPlayer(id)))
}

async fn allocate(State(s): AppState, Path(id): Path<String>) -> ApiResult<Json<LedgerDelta>> {
    let id = PlayerId(path_id(&id, "p")?);
    s.mutate(|g, now| g.allocate_initial(id, now)).map(Json)
}

async fn add_friendship(State(s): AppState, Body(body): Body<FriendshipBody>) -> ApiResult<Json<Changed>> {
    let changed = s.mutate(|g, now| g.add_friendship(body.a, body.b, now))?;
    Ok(Json(Changed { changed }))
}

async fn remove_friendship(State(s): AppState, Body(body): Body<FriendshipBody>) -> ApiResult<Json<Changed>> {
    let changed = s.mutate(|g, now| g.remove_friendship(body.a, body.b, now))?;
    Ok(Json(Changed { changed }))
}

async fn register_camera(State(s): AppState, Body(camera): Body<Camera>) -> ApiResult<impl IntoResponse> {
    s.mutate(|g, now| g.register_camera(camera.clone(), now))?;
    Ok((StatusCode::CREATED, Json(camera)))
}

async fn list_cameras(State(s): AppState) -> Json<Vec<Camera>> {
    Json(s.read(|g| g.cameras().values().cloned().collect()))
}

async fn map(State(s): AppState, caller: Caller) -> ApiResult<Json<MapView>> {
    s.require_registered(caller)?;
    let view = s.read(|g| {
        let cameras = g
            .cameras()
            .values()
            .map(|c| {
                let requests: Vec<SocialRequest> = g
                    .requests()
                    .filter(|r| {
                        r.state == RequestState::Open
                            && r.allowed_cameras.contains(&c.camera_id)
                            && g.are_friends(caller.0, r.requester_id)
                    })
                    .cloned()
                    .collect();
                MapCamera {
                    camera_id: c.camera_id,
                    position: c.position,
                    indoor: c.indoor,
                    open_request_count: requests.len(),
                    requests,
                }
            })
            .collect();
        MapView { cameras }
    });
    Ok(Json(view))
}

async fn publish_request(
    State(s): AppState,
    caller: Caller,
    Body(body): Body<NewRequest>,
) -> ApiResult<impl IntoResponse> {
    s.require_registered(caller)?;
    let request = s.mutate(|g, now| g.publish_request(caller.0, body.config, body.reward, body.allowed_cameras, now))?;
    Ok((StatusCode::CREATED, Json(request)))
}

fn visible_to(g: &lia_core::Game, caller: PlayerId, r: &SocialRequest) -> bool {
    r.requester_id == caller || (r.state == RequestState::Open && g.are_friends(caller, r.requester_id))
}

async fn list_requests(
    State(s): AppState,
    caller: Caller,
    Query(filter): Query<RequestFilter>,
) -> ApiResult<Json<Vec<SocialRequest>>> {
    s.require_registered(caller)?;
    Ok(Json(s.read(|g| {
        g.requests()
            .filter(|r| visible_to(g, caller.0, r))
            .filter(|r| filter.state.is_none_or(|st| r.state == st))
            .filter(|r| filter.camera.is_none_or(|c| r.allowed_cameras.contains(&c)))
            .cloned()
            .collect()
    })))
}

async fn get_request(State(s): AppState, caller: Caller, Path(id): Path<String>) -> ApiResult<Json<SocialRequest>> {
    s.require_registered(caller)?;
    let id = RequestId(path_id(&id, "req")?);
    s.read(|g| g.request(id).filter(|r| visible_to(g, caller.0, r)).cloned())
        .map(Json)
        .ok_or(ApiError::Game(GameError::UnknownRequest(id)))
}

async fn cancel_request(State(s): AppState, caller: Caller, Path(id): Path<String>) -> ApiResult<Json<LedgerDelta>> {
    s.require_registered(caller)?;
    let id = RequestId(path_id(&id, "req")?);
    s.mutate(|g, now| g.cancel_request(caller.0, id, now)).map(Json)
}

async fn perform(
    State(s): AppState,
    caller: Caller,
    Body(body): Body<NewPerformance>,
) -> ApiResult<impl IntoResponse> {
    s.require_registered(caller)?;
    let token = body
        .live_token
        .clone()
        .unwrap_or_else(|| format!("{:032x}", rand::random::<u128>()));
    let live = s
        .live
        .publisher(&token)
        .map_err(|_| ApiError::Conflict(format!("live token {token:?} is already in use")))?;
    let outcome = run_attempt(&s, caller.0, body, &live).await;
    match &outcome {
        Ok(p) => live.push(LiveStatus::Result {
            score: p.score,
            verdict: p.verdict,
        }),
        Err(e) => live.push(LiveStatus::Failed {
            error: match e {
                ApiError::Game(g) => g.class(),
                ApiError::Gateway(_) => lia_core::engine::ErrorClass::Unavailable,
                _ => lia_core::engine::ErrorClass::BadRequest,
            },
            message: e.message(),
        }),
    }
    drop(live);
    let performance = outcome?;
    Ok((
        StatusCode::CREATED,
        Json(PerformanceOutcome {
            performance,
            live_token: token,
        }),
    ))
}

async fn run_attempt(s: &Shared, performer: PlayerId, body: NewPerformance, live: &LivePublisher) -> ApiResult<Performance> {
    live.push(LiveStatus::Detecting);
    let (camera, config, performance_id, started_at) = s.mutate(|g, now| {
        let config = g.check_attempt(performer, body.request_id, body.camera_id)?.config.clone();
        let camera = g.cameras()[&body.camera_id].clone();
        Ok((camera, config, g.reserve_performance_id(), now))
    })?;
    let scene = body.scene.unwrap_or_else(|| {
        let foot = camera.detection_zone.vertex_mean();
        let h = (camera.frame_size.height as f64 / 4.0).max(1.0);
        SimulatedScene::faithful(&config, s.vocabulary.attribute_count(), Some(BoundingBox::standing_at(foot, h / 2.5, h)))
    });
    let presence = verify_presence(body.gps, &camera, scene.detected_box, s.radius_m);
    if !presence.passed() {
        return Err(GameError::PresenceFailed {
            within_radius: presence.within_radius,
            in_zone: presence.in_zone,
        }
        .into());
    }
    live.push(LiveStatus::Detected {
        detected_box: scene.detected_box.expect("presence passed, so a box exists"),
    });
    live.push(LiveStatus::Evaluating);

    let job = EvaluationJob {
        performance_id,
        camera_id: camera.camera_id,
        frame_refs: vec![
            format!("{}@{}", camera.camera_id, started_at.0),
            format!("{}@{}", camera.camera_id, started_at.plus_millis(PERFORMANCE_WINDOW_MS).0),
        ],
        scene,
    };
    match s.backend.evaluate(&job, &s.vocabulary).await {
        Ok(recognition) => s.mutate(|g, now| {
            g.attempt_performance(
                Attempt {
                    performance_id: Some(performance_id),
                    performer,
                    request: body.request_id,
                    camera: body.camera_id,
                    presence,
                    recognition,
                    started_at,
                },
                now,
            )
        }),
        Err(e) => {
            let reason = e.to_string();
            s.mutate(|g, now| {
                g.void_attempt(performance_id, performer, body.request_id, body.camera_id, &reason, now);
                Ok(())
            })?;
            Err(e.into())
        }
    }
}

async fn get_performance(State(s): AppState, caller: Caller, Path(id): Path<String>) -> ApiResult<Json<Performance>> {
    s.require_registered(caller)?;
    let id = PerformanceId(path_id(&id, "perf")?);
    s.read(|g| {
        g.performance(id)
            .filter(|p| {
                p.performer_id == caller.0 || g.request(p.request_id).is_some_and(|r| r.requester_id == caller.0)
            })
            .cloned()
    })
    .map(Json)
    .ok_or(ApiError::Game(GameError::UnknownPerformance(id)))
}

async fn live_status(
    State(s): AppState,
    Path(token): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>> {
    let rx = s
        .live
        .subscribe(&token)
        .map_err(|_| ApiError::Conflict(format!("live token {token:?} already has a subscriber")))?;
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        let status = rx.recv().await?;
        let event = SseEvent::default()
            .event(status.name())
            .data(serde_json::to_string(&status).expect("status serializes"));
        Some((Ok(event), rx))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

async fn submit_review(State(s): AppState, caller: Caller, Body(body): Body<NewReview>) -> ApiResult<Json<MedalCount>> {
    s.require_registered(caller)?;
    let medal_count = s.mutate(|g, now| {
        let review = Review::new(body.overall_score, body.attribute_confirmed, body.action_confirmed, now)
            .map_err(|e| GameError::InvalidReview(e.to_string()))?;
        g.submit_review(caller.0, body.performance_id, review, now)
    })?;
    Ok(Json(MedalCount { medal_count }))
}

async fn leaderboard(State(s): AppState) -> Json<Vec<LeaderboardEntry>> {
    Json(s.read(|g| g.leaderboard()))
}

async fn ledger(State(s): AppState) -> Json<LedgerView> {
    Json(s.read(|g| {
        let l = g.ledger();
        LedgerView {
            balances: l.balances().clone(),
            escrow: l.escrow_entries().clone(),
            mint_total: l.mint_total(),
            total_balances: l.total_balances(),
            total_escrow: l.total_escrow(),
            conserved: l.is_conserved(),
        }
    }))
}

async fn events(State(s): AppState, Query(q): Query<EventsQuery>) -> impl IntoResponse {
    let after = q.after.unwrap_or(0) as usize;
    let text: String = s.read(|g| {
        g.events()
            .iter()
            .skip(after)
            .map(|r| r.to_line() + "\n")
            .collect()
    });
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text)
}
