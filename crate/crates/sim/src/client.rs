//! Typed HTTP client for the public API. The simulator changes server state
//! only through these calls.

use std::collections::BTreeSet;

use lia_core::{Camera, CameraId, GeoPoint, Performance, PerformanceId, Player, PlayerId, RequestConfig, RequestId, SocialRequest};
use lia_server::api::{
    Changed, FriendshipBody, LedgerView, MedalCount, NewPerformance, NewPlayer, NewRequest, NewReview, PerformanceOutcome,
};
use lia_server::{ErrorBody, PLAYER_HEADER};
use reqwest::header::{HeaderMap, HeaderValue};
use reqwest::{Client, Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("server unreachable: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("{status} {}: {}", .body.error, .body.message)]
    Api { status: StatusCode, body: ErrorBody },
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Transport(_) => None,
        }
    }
}

/// One API session. Carries the player header when it acts for a player.
#[derive(Debug, Clone)]
pub struct Session {
    base: String,
    http: Client,
}

impl Session {
    pub fn anonymous(base: &str) -> Result<Self, ClientError> {
        Ok(Self {
            base: base.trim_end_matches('/').to_string(),
            http: Client::builder().build()?,
        })
    }

    pub fn as_player(base: &str, player: PlayerId) -> Result<Self, ClientError> {
        let mut headers = HeaderMap::new();
        headers.insert(PLAYER_HEADER, HeaderValue::from_str(&player.0.to_string()).expect("digits"));
        Ok(Self {
            base: base.trim_end_matches('/').to_string(),
            http: Client::builder().default_headers(headers).build()?,
        })
    }

    async fn send<T: DeserializeOwned>(&self, method: Method, path: &str, body: Option<&impl Serialize>) -> Result<T, ClientError> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            Ok(resp.json().await?)
        } else {
            let body = resp.json().await.unwrap_or_else(|e| ErrorBody {
                error: "unreadable".into(),
                message: e.to_string(),
            });
            Err(ClientError::Api { status, body })
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        self.send(Method::GET, path, None::<&()>).await
    }

    async fn post<T: DeserializeOwned>(&self, path: &str, body: &impl Serialize) -> Result<T, ClientError> {
        self.send(Method::POST, path, Some(body)).await
    }

    pub async fn register(&self, display_name: &str) -> Result<Player, ClientError> {
        self.post(
            "/players",
            &NewPlayer {
                display_name: display_name.to_string(),
                allocate: true,
            },
        )
        .await
    }

    pub async fn player(&self, id: PlayerId) -> Result<Player, ClientError> {
        self.get(&format!("/players/{}", id.0)).await
    }

    pub async fn befriend(&self, a: PlayerId, b: PlayerId) -> Result<bool, ClientError> {
        let c: Changed = self.post("/friendships", &FriendshipBody { a, b }).await?;
        Ok(c.changed)
    }

    pub async fn add_camera(&self, camera: &Camera) -> Result<Camera, ClientError> {
        self.post("/cameras", camera).await
    }

    pub async fn publish(
        &self,
        config: RequestConfig,
        reward: u64,
        allowed_cameras: BTreeSet<CameraId>,
    ) -> Result<SocialRequest, ClientError> {
        self.post(
            "/requests",
            &NewRequest {
                config,
                reward,
                allowed_cameras,
            },
        )
        .await
    }

    /// Requests visible to this session's player, oldest first.
    pub async fn requests(&self, state: &str) -> Result<Vec<SocialRequest>, ClientError> {
        let mut list: Vec<SocialRequest> = self.get(&format!("/requests?state={state}")).await?;
        list.sort_by_key(|r| r.request_id);
        Ok(list)
    }

    pub async fn perform(&self, request: RequestId, camera: CameraId, gps: GeoPoint) -> Result<PerformanceOutcome, ClientError> {
        self.post(
            "/performances",
            &NewPerformance {
                request_id: request,
                camera_id: camera,
                gps,
                live_token: None,
                scene: None,
            },
        )
        .await
    }

    pub async fn performance(&self, id: PerformanceId) -> Result<Performance, ClientError> {
        self.get(&format!("/performances/{}", id.0)).await
    }

    pub async fn review(&self, review: &NewReview) -> Result<u64, ClientError> {
        let m: MedalCount = self.post("/reviews", review).await?;
        Ok(m.medal_count)
    }

    pub async fn ledger(&self) -> Result<LedgerView, ClientError> {
        self.get("/ledger").await
    }

    pub async fn events(&self) -> Result<String, ClientError> {
        let resp = self.http.get(format!("{}/events", self.base)).send().await?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ClientError::Api {
                status,
                body: ErrorBody {
                    error: "unexpected".into(),
                    message: format!("GET /events returned {status}"),
                },
            });
        }
        Ok(resp.text().await?)
    }
}
