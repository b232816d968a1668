use serde::{Deserialize, Serialize};

use super::{CameraId, DomainError};

const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    /// Great-circle distance in metres (haversine, mean Earth radius).
    pub fn distance_m(&self, other: &GeoPoint) -> f64 {
        let (phi1, phi2) = (self.lat.to_radians(), other.lat.to_radians());
        let dphi = phi2 - phi1;
        let dlambda = (other.lon - self.lon).to_radians();
        let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
    }

    /// The point `metres` due north of this one.
    pub fn offset_north(&self, metres: f64) -> GeoPoint {
        GeoPoint::new(self.lat + (metres / EARTH_RADIUS_M).to_degrees(), self.lon)
    }
}

/// A point in image coordinates (pixels, origin top-left, y down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pixel {
    pub x: f64,
    pub y: f64,
}

impl Pixel {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    /// Bottom-centre of the box, where the person stands.
    pub fn foot_point(&self) -> Pixel {
        Pixel::new(self.x + self.width / 2.0, self.y + self.height)
    }

    /// A box of the given size whose foot point lands on `foot`.
    pub fn standing_at(foot: Pixel, width: f64, height: f64) -> Self {
        Self {
            x: foot.x - width / 2.0,
            y: foot.y - height,
            width,
            height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon(pub Vec<Pixel>);

impl Polygon {
    pub fn vertices(&self) -> &[Pixel] {
        &self.0
    }

    fn edges(&self) -> impl Iterator<Item = (Pixel, Pixel)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }

    /// Boundary-inclusive containment test. Points on an edge or vertex are
    /// inside; otherwise even-odd ray casting decides.
    pub fn contains(&self, p: Pixel) -> bool {
        if self.0.len() < 3 {
            return false;
        }
        if self.edges().any(|(a, b)| on_segment(a, b, p)) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Arithmetic mean of the vertices. Equals the area centroid only for
    /// symmetric shapes but is interior for any convex polygon.
    pub fn vertex_mean(&self) -> Pixel {
        let n = self.0.len().max(1) as f64;
        let (sx, sy) = self.0.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        Pixel::new(sx / n, sy / n)
    }

    /// True when no two non-adjacent edges touch and no edge is degenerate.
    pub fn is_simple(&self) -> bool {
        let n = self.0.len();
        if n < 3 {
            return false;
        }
        let edges: Vec<(Pixel, Pixel)> = self.edges().collect();
        if edges.iter().any(|(a, b)| a == b) {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if adjacent {
                    // Adjacent edges share exactly one endpoint; they must not fold back.
                    let shared = if j == i + 1 { b } else { a };
                    let (other_i, other_j) = if j == i + 1 { (a, d) } else { (b, c) };
                    if cross(shared, other_i, other_j) == 0.0
                        && (on_segment(a, b, other_j) || on_segment(c, d, other_i))
                    {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

fn cross(o: Pixel, a: Pixel, b: Pixel) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(a: Pixel, b: Pixel, p: Pixel) -> bool {
    cross(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Pixel, b: Pixel, c: Pixel, d: Pixel) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Camera {
    pub camera_id: CameraId,
    pub position: GeoPoint,
    pub indoor: bool,
    pub detection_zone: Polygon,
    pub frame_size: FrameSize,
}

impl Camera {
    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |reason: &str| DomainError::BadCamera {
            camera: self.camera_id,
            reason: reason.to_string(),
        };
        if !(-90.0..=90.0).contains(&self.position.lat) || !(-180.0..=180.0).contains(&self.position.lon) {
            return Err(bad("position outside lat/lon range"));
        }
        if self.frame_size.width == 0 || self.frame_size.height == 0 {
            return Err(bad("empty frame"));
        }
        if !self.detection_zone.is_simple() {
            return Err(bad("detection zone is not a simple polygon"));
        }
        let (w, h) = (self.frame_size.width as f64, self.frame_size.height as f64);
        if self
            .detection_zone
            .vertices()
            .iter()
            .any(|p| !(0.0..=w).contains(&p.x) || !(0.0..=h).contains(&p.y))
        {
            return Err(bad("detection zone extends outside the frame"));
        }
        Ok(())
    }
}
