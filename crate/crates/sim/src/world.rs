//! Static scenery of a run: the friendship graph, the cameras and random
//! request configurations.

use std::collections::BTreeSet;

use lia_core::domain::{FrameSize, Pixel, Polygon};
use lia_core::{Camera, CameraId, GeoPoint, RequestConfig, Vocabulary};
use rand::seq::SliceRandom;
use rand::Rng;

/// Undirected friendship graph over players `0..n`, with a close flag per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FriendGraph {
    pub n: usize,
    /// `(a, b, close)` with `a < b`.
    pub edges: Vec<(usize, usize, bool)>,
}

impl FriendGraph {
    /// Random graph where every player has at least `min_degree` friends and
    /// the edge count is `round(density · n(n−1)/2)` (or more, if the degree
    /// floor needs it). `round(close_fraction · edges)` edges are close.
    pub fn generate(n: usize, density: f64, min_degree: usize, close_fraction: f64, rng: &mut impl Rng) -> Self {
        let mut adj = vec![BTreeSet::new(); n];
        let add = |a: usize, b: usize, adj: &mut Vec<BTreeSet<usize>>| {
            adj[a].insert(b);
            adj[b].insert(a);
        };
        for a in 0..n {
            while adj[a].len() < min_degree.min(n - 1) {
                let candidates: Vec<usize> = (0..n).filter(|&b| b != a && !adj[a].contains(&b)).collect();
                let b = candidates[rng.random_range(0..candidates.len())];
                add(a, b, &mut adj);
            }
        }
        let pairs = n * (n - 1) / 2;
        let target = (density * pairs as f64).round() as usize;
        let mut missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .filter(|(a, b)| !adj[*a].contains(b))
            .collect();
        missing.shuffle(rng);
        let have = adj.iter().map(BTreeSet::len).sum::<usize>() / 2;
        for &(a, b) in missing.iter().take(target.saturating_sub(have)) {
            add(a, b, &mut adj);
        }
        let mut edges: Vec<(usize, usize, bool)> = (0..n)
            .flat_map(|a| adj[a].iter().filter(move |&&b| b > a).map(move |&b| (a, b, false)))
            .collect();
        let close = (close_fraction * edges.len() as f64).round() as usize;
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.shuffle(rng);
        for &i in order.iter().take(close) {
            edges[i].2 = true;
        }
        Self { n, edges }
    }

    pub fn friends_of(&self, p: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b, _)| match (a == p, b == p) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn is_close(&self, a: usize, b: usize) -> bool {
        let (a, b) = (a.min(b), a.max(b));
        self.edges.iter().any(|&(x, y, c)| x == a && y == b && c)
    }

    pub fn density(&self) -> f64 {
        self.edges.len() as f64 / (self.n * (self.n - 1) / 2) as f64
    }

    pub fn close_count(&self) -> usize {
        self.edges.iter().filter(|e| e.2).count()
    }
}

/// Cameras spread over a small campus; the first `outdoor` are outdoors.
pub fn campus_cameras(outdoor: usize, indoor: usize) -> Vec<Camera> {
    let origin = GeoPoint::new(22.5960, 113.9980);
    (0..outdoor + indoor)
        .map(|i| {
            let north = origin.offset_north(120.0 * i as f64);
            Camera {
                camera_id: CameraId(i as u64 + 1),
                position: GeoPoint::new(north.lat, origin.lon + 0.0008 * (i % 2) as f64),
                indoor: i >= outdoor,
                detection_zone: Polygon(vec![
                    Pixel::new(160.0, 260.0),
                    Pixel::new(1120.0, 260.0),
                    Pixel::new(1240.0, 710.0),
                    Pixel::new(40.0, 710.0),
                ]),
                frame_size: FrameSize { width: 1280, height: 720 },
            }
        })
        .collect()
}

/// Uniform action and 1 to 3 attributes that respect exclusive groups.
pub fn random_config(vocab: &Vocabulary, rng: &mut impl Rng) -> RequestConfig {
    let action = rng.random_range(0..vocab.action_count());
    let size = rng.random_range(1..=3usize).min(vocab.attribute_count());
    let mut pool: Vec<usize> = (0..vocab.attribute_count()).collect();
    let mut chosen = BTreeSet::new();
    let mut groups = BTreeSet::new();
    while chosen.len() < size && !pool.is_empty() {
        let j = pool.swap_remove(rng.random_range(0..pool.len()));
        match vocab.attributes.group_of(j) {
            Some(g) if !groups.insert(g) => continue,
            _ => {
                chosen.insert(j);
            }
        }
    }
    RequestConfig {
        action_index: action,
        attribute_set: chosen,
    }
}
