mod common;

use common::{camera, TestServer};
use lia_core::engine::parse_log;
use lia_core::Game;
use lia_server::ServerConfig;
use reqwest::{Method, StatusCode};
use serde_json::json;

/// Requester 1 and performer 2 are friends; 3 is a stranger. Cameras 1 and 2.
async fn basic() -> TestServer {
    let s = TestServer::start(ServerConfig::default()).await;
    for name in ["ana", "bo", "cy"] {
        s.player(name).await;
    }
    s.befriend(1, 2).await;
    s.add_camera(1).await;
    s.add_camera(2).await;
    s
}

#[tokio::test]
async fn players_start_with_allocation() {
    let s = basic().await;
    let (st, v) = s.get("/players/p1", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["ep-balance"], 100);
    assert_eq!(v["friend-ids"], json!([2]));
    let (st, v) = s.post("/players/1/allocate", None, json!({})).await;
    assert_eq!(st, StatusCode::CONFLICT, "{v}");
    assert_eq!(v["error"], "conflict");
    let (st, _) = s.get("/players/99", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn publish_status_codes() {
    let s = basic().await;
    let (st, v) = s.publish(1, 0, &[0, 4], 20, &[1, 2]).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    assert_eq!(v["state"], "OPEN");
    assert_eq!(s.get("/players/1", None).await.1["ep-balance"], 80);

    assert_eq!(s.publish(1, 0, &[0], 0, &[1]).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(s.publish(1, 0, &[0], 5, &[9]).await.0, StatusCode::NOT_FOUND);
    let (st, v) = s.publish(1, 0, &[0], 90, &[1]).await;
    assert_eq!(st, StatusCode::PAYMENT_REQUIRED);
    assert_eq!(v["error"], "payment-required");
    let (st, v) = s.publish(1, 0, &[0, 1], 5, &[1]).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert!(v["message"].as_str().unwrap().contains("exclusive group"), "{v}");
    assert_eq!(s.publish(1, 7, &[0], 5, &[1]).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(s.publish(99, 0, &[0], 5, &[1]).await.0, StatusCode::UNAUTHORIZED);
    let (st, _) = s.post("/requests", None, json!({})).await;
    assert_eq!(st, StatusCode::UNAUTHORIZED);
    let (st, v) = s.post("/requests", Some(1), json!({ "reward": "lots" })).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "bad-request");
}

#[tokio::test]
async fn map_counts_are_friend_gated() {
    let s = basic().await;
    let (st, v) = s.get("/map", Some(2)).await;
    assert_eq!(st, StatusCode::OK);
    assert!(v["cameras"].as_array().unwrap().iter().all(|c| c["open-request-count"] == 0));

    s.publish(1, 1, &[6], 10, &[1, 2]).await;
    let (_, v) = s.get("/map", Some(2)).await;
    let counts: Vec<_> = v["cameras"].as_array().unwrap().iter().map(|c| c["open-request-count"].clone()).collect();
    assert_eq!(counts, vec![json!(1), json!(1)]);
    let (_, v) = s.get("/map", Some(3)).await;
    assert!(v["cameras"].as_array().unwrap().iter().all(|c| c["open-request-count"] == 0));
    assert_eq!(s.get("/map", None).await.0, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn request_listing_rules() {
    let s = basic().await;
    s.publish(1, 1, &[6], 10, &[1]).await;
    s.publish(3, 1, &[6], 10, &[2]).await;
    let (_, v) = s.get("/requests", Some(2)).await;
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["requester-id"], 1);
    let (_, v) = s.get("/requests?camera=2", Some(2)).await;
    assert_eq!(v, json!([]));
    // Own requests are listed in every state.
    s.post("/requests/1/cancel", Some(1), json!({})).await;
    let (_, v) = s.get("/requests?state=CANCELLED", Some(1)).await;
    assert_eq!(v.as_array().unwrap().len(), 1);
    let (_, v) = s.get("/requests", Some(2)).await;
    assert_eq!(v, json!([]));
    assert_eq!(s.get("/requests/2", Some(2)).await.0, StatusCode::NOT_FOUND);
    assert_eq!(s.get("/requests/req2", Some(3)).await.0, StatusCode::OK);
}

#[tokio::test]
async fn perform_review_and_ledger() {
    let s = basic().await;
    let (_, req) = s.publish(1, 0, &[2, 8], 25, &[1, 2]).await;
    let rid = req["request-id"].as_u64().unwrap();

    let (st, v) = s.perform(3, rid, 1, json!({})).await;
    assert_eq!(st, StatusCode::CONFLICT, "stranger: {v}");
    let (st, _) = s.perform(2, rid, 3, json!({})).await;
    assert_eq!(st, StatusCode::NOT_FOUND);

    // A performer in the wrong clothes fails and the request stays open.
    let wrong = json!({ "scene": { "action": 3, "attributes": (vec![false; 12]), "detected-box": { "x": 500.0, "y": 300.0, "width": 80.0, "height": 200.0 } } });
    let (st, v) = s.perform(2, rid, 1, wrong).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    assert_eq!(v["performance"]["verdict"], "FAIL");
    assert_eq!(s.get("/requests/1", Some(1)).await.1["state"], "OPEN");

    let mut passed = None;
    for _ in 0..20 {
        let (st, v) = s.perform(2, rid, 2, json!({})).await;
        if st == StatusCode::CONFLICT {
            break;
        }
        assert_eq!(st, StatusCode::CREATED, "{v}");
        if v["performance"]["verdict"] == "PASS" {
            passed = Some(v["performance"]["performance-id"].as_u64().unwrap());
            break;
        }
    }
    let perf = passed.expect("a faithful performer passes within 20 tries");
    assert_eq!(s.get("/players/2", None).await.1["ep-balance"], 125);
    let (st, v) = s.perform(2, rid, 1, json!({})).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert!(v["message"].as_str().unwrap().contains("not open"));

    let review = |score: u8| json!({ "performance-id": perf, "overall-score": score, "attribute-confirmed": true, "action-confirmed": false });
    assert_eq!(s.post("/reviews", Some(2), review(5)).await.0, StatusCode::CONFLICT);
    assert_eq!(s.post("/reviews", Some(1), review(6)).await.0, StatusCode::BAD_REQUEST);
    let (st, v) = s.post("/reviews", Some(1), review(5)).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["medal-count"], 1);
    assert_eq!(s.post("/reviews", Some(1), review(4)).await.0, StatusCode::CONFLICT);

    let (_, p) = s.get(&format!("/performances/{perf}"), Some(1)).await;
    assert_eq!(p["review"]["overall-score"], 5);
    assert_eq!(s.get(&format!("/performances/{perf}"), Some(3)).await.0, StatusCode::NOT_FOUND);

    let (_, board) = s.get("/leaderboard", None).await;
    assert_eq!(board[0]["player-id"], 1);
    assert_eq!(board[0]["medal-count"], 1);
    assert_eq!(board[1]["player-id"], 2);
    let (_, ledger) = s.get("/ledger", None).await;
    assert_eq!(ledger["conserved"], true);
    assert_eq!(ledger["mint-total"], 300);
    assert_eq!(ledger["total-escrow"], 0);
}

#[tokio::test]
async fn presence_failures() {
    let s = basic().await;
    let (_, req) = s.publish(1, 0, &[2], 5, &[1]).await;
    let rid = req["request-id"].as_u64().unwrap();
    let far = camera(1).position.offset_north(200.0);
    let (st, v) = s.perform(2, rid, 1, json!({ "gps": far })).await;
    assert_eq!(st, StatusCode::BAD_REQUEST, "{v}");
    assert!(v["message"].as_str().unwrap().contains("within radius: false"));
    let outside = json!({ "scene": { "action": 0, "attributes": (vec![false; 12]), "detected-box": { "x": 0.0, "y": 500.0, "width": 50.0, "height": 219.0 } } });
    let (st, v) = s.perform(2, rid, 1, outside).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert!(v["message"].as_str().unwrap().contains("in zone: false"));
    let nobody = json!({ "scene": { "action": 0, "attributes": (vec![false; 12]) } });
    assert_eq!(s.perform(2, rid, 1, nobody).await.0, StatusCode::BAD_REQUEST);
    // Nothing was recorded for rejected attempts.
    assert!(!s.events_text().contains("performance-recorded"));
}

#[tokio::test]
async fn events_endpoint_replays_to_the_same_state() {
    let s = basic().await;
    s.publish(1, 0, &[2], 5, &[1]).await;
    s.perform(2, 1, 1, json!({})).await;
    s.publish(2, 4, &[11], 7, &[2]).await;
    s.post("/requests/2/cancel", Some(2), json!({})).await;
    let (st, text) = s.call(Method::GET, "/events", None, None).await;
    assert_eq!(st, StatusCode::OK);
    let text = text.as_str().unwrap().to_string();
    assert_eq!(text, s.events_text());
    let replayed = Game::replay(Default::default(), &parse_log(&text).unwrap()).unwrap();
    assert_eq!(replayed.canonical_state(), s.app.read(|g| g.canonical_state()));
    let (_, tail) = s.call(Method::GET, "/events?after=9", None, None).await;
    assert!(tail.as_str().unwrap().starts_with("10\t"));
}

#[tokio::test]
async fn friendship_removal_hides_requests() {
    let s = basic().await;
    s.publish(1, 0, &[2], 5, &[1]).await;
    let (st, v) = s.call(Method::DELETE, "/friendships", None, Some(json!({ "a": 2, "b": 1 }))).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["changed"], true);
    assert_eq!(s.get("/requests", Some(2)).await.1, json!([]));
    let (st, v) = s.perform(2, 1, 1, json!({})).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert!(v["message"].as_str().unwrap().contains("not a friend"));
}
