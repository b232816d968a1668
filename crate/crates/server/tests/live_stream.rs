mod common;

use common::{read_sse, TestServer};
use lia_server::ServerConfig;
use reqwest::StatusCode;
use serde_json::json;

async fn setup() -> (TestServer, u64) {
    let s = TestServer::start(ServerConfig::default()).await;
    s.player("requester").await;
    s.player("performer").await;
    s.befriend(1, 2).await;
    s.add_camera(1).await;
    let (_, req) = s.publish(1, 2, &[1, 7], 10, &[1]).await;
    let rid = req["request-id"].as_u64().unwrap();
    (s, rid)
}

#[tokio::test]
async fn statuses_arrive_in_order_when_subscribed_first() {
    let (s, rid) = setup().await;
    let resp = s.client.get(format!("{}/live/tok-1", s.base)).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert!(resp.headers()["content-type"].to_str().unwrap().starts_with("text/event-stream"));
    let reader = tokio::spawn(read_sse(resp));
    let (st, v) = s.perform(2, rid, 1, json!({ "live-token": "tok-1" })).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    assert_eq!(v["live-token"], "tok-1");
    let events = reader.await.unwrap();
    let names: Vec<_> = events.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["DETECTING", "DETECTED", "EVALUATING", "RESULT"]);
    assert_eq!(events[1].1["box"]["height"], 180.0);
    assert_eq!(events[3].1["verdict"], v["performance"]["verdict"]);
    assert_eq!(events[3].1["score"], v["performance"]["score"]);
}

#[tokio::test]
async fn late_subscriber_gets_buffered_statuses() {
    let (s, rid) = setup().await;
    let (_, v) = s.perform(2, rid, 1, json!({})).await;
    let token = v["live-token"].as_str().unwrap().to_string();
    let resp = s.client.get(format!("{}/live/{token}", s.base)).send().await.unwrap();
    let names: Vec<_> = read_sse(resp).await.into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["DETECTING", "DETECTED", "EVALUATING", "RESULT"]);
    // Second subscription to the same token is refused.
    let again = s.client.get(format!("{}/live/{token}", s.base)).send().await.unwrap();
    assert_eq!(again.status(), StatusCode::CONFLICT);
}

#[tokio::test]
async fn presence_failure_ends_after_detecting() {
    let (s, rid) = setup().await;
    let far = common::camera(1).position.offset_north(500.0);
    let (st, v) = s.perform(2, rid, 1, json!({ "gps": far, "live-token": "far" })).await;
    assert_eq!(st, StatusCode::BAD_REQUEST, "{v}");
    let resp = s.client.get(format!("{}/live/far", s.base)).send().await.unwrap();
    let events = read_sse(resp).await;
    let names: Vec<_> = events.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["DETECTING", "FAILED"]);
    assert_eq!(events[1].1["error"], "bad-request");
}

#[tokio::test]
async fn reused_token_is_rejected() {
    let (s, rid) = setup().await;
    let far = common::camera(1).position.offset_north(500.0);
    s.perform(2, rid, 1, json!({ "gps": far, "live-token": "dup" })).await;
    let (st, v) = s.perform(2, rid, 1, json!({ "live-token": "dup" })).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert!(v["message"].as_str().unwrap().contains("already in use"));
}
