#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use futures::StreamExt;
use lia_core::domain::{FrameSize, Pixel, Polygon};
use lia_core::{Camera, CameraId, GeoPoint, PlayerId, Timestamp};
use lia_server::{App, ManualClock, ServerConfig, PLAYER_HEADER};
use reqwest::{Client, Method, StatusCode};
use serde_json::{json, Value};

pub struct TestServer {
    pub base: String,
    pub client: Client,
    pub app: App,
    pub clock: Arc<ManualClock>,
    _handle: tokio::task::JoinHandle<()>,
}

pub fn camera(id: u64) -> Camera {
    Camera {
        camera_id: CameraId(id),
        position: GeoPoint::new(30.0 + id as f64 * 0.01, 120.0),
        indoor: id >= 4,
        detection_zone: Polygon(vec![
            Pixel::new(100.0, 200.0),
            Pixel::new(1100.0, 200.0),
            Pixel::new(1100.0, 700.0),
            Pixel::new(100.0, 700.0),
        ]),
        frame_size: FrameSize { width: 1280, height: 720 },
    }
}

impl TestServer {
    pub async fn start(config: ServerConfig) -> Self {
        let clock = Arc::new(ManualClock::new(Timestamp(1_700_000_000_000)));
        let app = App::new(config, clock.clone()).unwrap();
        let (addr, handle): (SocketAddr, _) = app.spawn_local().await.unwrap();
        Self {
            base: format!("http://{addr}"),
            client: Client::new(),
            app,
            clock,
            _handle: handle,
        }
    }

    pub async fn call(&self, method: Method, path: &str, caller: Option<u64>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.client.request(method, format!("{}{}", self.base, path));
        if let Some(p) = caller {
            req = req.header(PLAYER_HEADER, format!("p{p}"));
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let text = resp.text().await.unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    pub async fn get(&self, path: &str, caller: Option<u64>) -> (StatusCode, Value) {
        self.call(Method::GET, path, caller, None).await
    }

    pub async fn post(&self, path: &str, caller: Option<u64>, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, caller, Some(body)).await
    }

    pub async fn player(&self, name: &str) -> u64 {
        let (st, v) = self.post("/players", None, json!({ "display-name": name })).await;
        assert_eq!(st, StatusCode::CREATED, "{v}");
        v["player-id"].as_u64().unwrap()
    }

    pub async fn befriend(&self, a: u64, b: u64) {
        let (st, v) = self.post("/friendships", None, json!({ "a": a, "b": b })).await;
        assert_eq!(st, StatusCode::OK, "{v}");
    }

    pub async fn add_camera(&self, id: u64) {
        let (st, v) = self.post("/cameras", None, serde_json::to_value(camera(id)).unwrap()).await;
        assert_eq!(st, StatusCode::CREATED, "{v}");
    }

    pub async fn publish(&self, who: u64, action: usize, attrs: &[usize], reward: u64, cams: &[u64]) -> (StatusCode, Value) {
        self.post(
            "/requests",
            Some(who),
            json!({
                "config": { "action-index": action, "attribute-set": attrs },
                "reward": reward,
                "allowed-cameras": cams,
            }),
        )
        .await
    }

    pub async fn perform(&self, who: u64, request: u64, cam: u64, extra: Value) -> (StatusCode, Value) {
        let gps = serde_json::to_value(camera(cam).position).unwrap();
        let mut body = json!({ "request-id": request, "camera-id": cam, "gps": gps });
        if let Value::Object(m) = extra {
            for (k, v) in m {
                body[k] = v;
            }
        }
        self.post("/performances", Some(who), body).await
    }

    pub fn events_text(&self) -> String {
        self.app.read(|g| g.events().iter().map(|r| r.to_line() + "\n").collect())
    }
}

/// Read a server-sent event stream to its end as (event name, data) pairs.
pub async fn read_sse(resp: reqwest::Response) -> Vec<(String, Value)> {
    let mut buf = String::new();
    let mut out = Vec::new();
    let mut stream = resp.bytes_stream();
    while let Some(chunk) = stream.next().await {
        buf.push_str(std::str::from_utf8(&chunk.unwrap()).unwrap());
        while let Some(end) = buf.find("\n\n") {
            let block: String = buf.drain(..end + 2).collect();
            let mut name = String::new();
            let mut data = String::new();
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("event:") {
                    name = v.trim().to_string();
                } else if let Some(v) = line.strip_prefix("data:") {
                    data.push_str(v.trim());
                }
            }
            if !name.is_empty() {
                out.push((name, serde_json::from_str(&data).unwrap()));
            }
        }
    }
    out
}

pub fn pid(v: &Value) -> PlayerId {
    PlayerId(v.as_u64().unwrap())
}
