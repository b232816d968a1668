mod common;

use std::collections::BTreeSet;

use common::TestServer;
use lia_server::ServerConfig;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn responses_never_leak_strangers_requests(
        n in 3usize..8,
        edges in prop::collection::vec((0usize..8, 0usize..8), 0..20),
        requests in prop::collection::vec((0usize..8, 1u64..3), 1..10),
    ) {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async {
            let s = TestServer::start(ServerConfig::default()).await;
            for i in 0..n {
                s.player(&format!("p{i}")).await;
            }
            s.add_camera(1).await;
            s.add_camera(2).await;
            let mut friends = BTreeSet::new();
            for &(a, b) in &edges {
                let (a, b) = (a % n + 1, b % n + 1);
                if a != b {
                    s.befriend(a as u64, b as u64).await;
                    friends.insert((a.min(b), a.max(b)));
                }
            }
            for &(who, cam) in &requests {
                s.publish((who % n + 1) as u64, 0, &[2], 1, &[cam]).await;
            }
            let are_friends = |a: u64, b: u64| friends.contains(&(a.min(b) as usize, a.max(b) as usize));
            for caller in 1..=n as u64 {
                let (_, list) = s.get("/requests", Some(caller)).await;
                for r in list.as_array().unwrap() {
                    let owner = r["requester-id"].as_u64().unwrap();
                    assert!(owner == caller || are_friends(caller, owner));
                }
                let expected_visible = requests
                    .iter()
                    .filter(|(w, _)| {
                        let owner = (w % n + 1) as u64;
                        owner == caller || are_friends(caller, owner)
                    })
                    .count();
                assert_eq!(list.as_array().unwrap().len(), expected_visible);

                let (_, map) = s.get("/map", Some(caller)).await;
                for cam in map["cameras"].as_array().unwrap() {
                    let id = cam["camera-id"].as_u64().unwrap();
                    let expected = requests
                        .iter()
                        .filter(|(w, c)| *c == id && are_friends(caller, (w % n + 1) as u64))
                        .count();
                    assert_eq!(cam["open-request-count"].as_u64().unwrap() as usize, expected);
                    for r in cam["requests"].as_array().unwrap() {
                        assert!(are_friends(caller, r["requester-id"].as_u64().unwrap()));
                    }
                }
            }
        });
    }
}
