use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::GatewayError;
use crate::domain::{BoundingBox, Camera, CameraId, GeoPoint};

pub const DEFAULT_RADIUS_M: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PresenceCheck {
    pub gps_position: GeoPoint,
    pub detected_box: Option<BoundingBox>,
    pub in_zone: bool,
    pub within_radius: bool,
}

impl PresenceCheck {
    pub fn passed(&self) -> bool {
        self.in_zone && self.within_radius
    }
}

/// GPS within `radius_m` of the camera and a detected person whose foot point
/// lies in the detection zone (boundary inclusive).
pub fn verify_presence(
    performer_gps: GeoPoint,
    camera: &Camera,
    detection: Option<BoundingBox>,
    radius_m: f64,
) -> PresenceCheck {
    let within_radius = performer_gps.distance_m(&camera.position) <= radius_m;
    let in_zone = detection.is_some_and(|b| camera.detection_zone.contains(b.foot_point()));
    PresenceCheck {
        gps_position: performer_gps,
        detected_box: detection,
        in_zone,
        within_radius,
    }
}

pub fn verify_presence_at(
    cameras: &BTreeMap<CameraId, Camera>,
    camera_id: CameraId,
    performer_gps: GeoPoint,
    detection: Option<BoundingBox>,
    radius_m: f64,
) -> Result<PresenceCheck, GatewayError> {
    let camera = cameras
        .get(&camera_id)
        .ok_or(GatewayError::UnknownCamera(camera_id))?;
    Ok(verify_presence(performer_gps, camera, detection, radius_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{FrameSize, Pixel, Polygon};
    use proptest::prelude::*;

    fn camera() -> Camera {
        Camera {
            camera_id: CameraId(1),
            position: GeoPoint::new(39.98, 116.33),
            indoor: false,
            detection_zone: Polygon(vec![
                Pixel::new(100.0, 300.0),
                Pixel::new(500.0, 300.0),
                Pixel::new(600.0, 700.0),
                Pixel::new(0.0, 700.0),
            ]),
            frame_size: FrameSize { width: 1280, height: 720 },
        }
    }

    #[test]
    fn at_camera_and_zone_centre_passes() {
        let cam = camera();
        let foot = cam.detection_zone.vertex_mean();
        let check = verify_presence(cam.position, &cam, Some(BoundingBox::standing_at(foot, 80.0, 200.0)), DEFAULT_RADIUS_M);
        assert!(check.within_radius && check.in_zone && check.passed());
    }

    #[test]
    fn far_away_fails_radius() {
        let cam = camera();
        let gps = cam.position.offset_north(200.0);
        let foot = cam.detection_zone.vertex_mean();
        let check = verify_presence(gps, &cam, Some(BoundingBox::standing_at(foot, 80.0, 200.0)), 50.0);
        assert!(!check.within_radius);
        assert!(check.in_zone);
        assert!(!check.passed());
    }

    #[test]
    fn foot_on_vertex_is_in_zone() {
        let cam = camera();
        let check = verify_presence(cam.position, &cam, Some(BoundingBox::standing_at(Pixel::new(600.0, 700.0), 60.0, 180.0)), 50.0);
        assert!(check.in_zone);
    }

    #[test]
    fn no_detection_is_not_in_zone() {
        let cam = camera();
        assert!(!verify_presence(cam.position, &cam, None, 50.0).in_zone);
    }

    #[test]
    fn unknown_camera_is_not_found() {
        let cams = BTreeMap::from([(CameraId(1), camera())]);
        assert!(matches!(
            verify_presence_at(&cams, CameraId(9), GeoPoint::new(0.0, 0.0), None, 50.0),
            Err(GatewayError::UnknownCamera(CameraId(9)))
        ));
    }

    /// Winding number with its own boundary rule, sharing nothing with
    /// `Polygon::contains`.
    fn winding_contains(poly: &[Pixel], p: Pixel) -> bool {
        let n = poly.len();
        let mut winding = 0i32;
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let orient = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
            let within_box = (a.x.min(b.x)..=a.x.max(b.x)).contains(&p.x)
                && (a.y.min(b.y)..=a.y.max(b.y)).contains(&p.y);
            if orient == 0.0 && within_box {
                return true;
            }
            if a.y <= p.y {
                if b.y > p.y && orient > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && orient < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }

    /// Star-shaped polygons around a centre are always simple.
    fn star_polygon() -> impl Strategy<Value = Vec<Pixel>> {
        (3usize..12, 100.0f64..900.0, 100.0f64..500.0).prop_flat_map(|(n, cx, cy)| {
            (prop::collection::vec((0.0f64..1.0, 10.0f64..90.0), n)).prop_map(move |raw| {
                let mut angles: Vec<(f64, f64)> = raw;
                angles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                angles
                    .iter()
                    .enumerate()
                    .map(|(i, (jitter, r))| {
                        let theta = (i as f64 + 0.9 * jitter) / angles.len() as f64 * std::f64::consts::TAU;
                        Pixel::new((cx + r * theta.cos()).round(), (cy + r * theta.sin()).round())
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn contains_agrees_with_winding_number(
            poly in star_polygon(),
            px in 0.0f64..1000.0,
            py in 0.0f64..600.0,
            snap in any::<bool>(),
        ) {
            // Integer points land on edges and vertices often enough to exercise the boundary rule.
            let p = if snap { Pixel::new(px.round(), py.round()) } else { Pixel::new(px, py) };
            let polygon = Polygon(poly.clone());
            prop_assert_eq!(polygon.contains(p), winding_contains(&poly, p));
            for v in &poly {
                prop_assert!(polygon.contains(*v));
            }
        }
    }
}
