//! Diffraction over and around blocking vehicles.

use super::{multiple_knife_edge_loss, two_ray_rays, Antenna, KnifeEdge, RadioConfig, Ray, RayKind};
use crate::classify::{ObstructionDetail, SceneIndex};
use crate::geometry::{self, Point2};
use crate::scenario::{StaticKind, Vehicle};

fn db_to_amplitude(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 20.0)
}

/// Rays for a vehicle-obstructed link: the direct and ground rays scaled by
/// the roof-top multiple knife-edge loss, plus one ray around each side of
/// the blocking vehicles when the roof path is attenuated.
pub fn vehicle_obstruction_field(
    tx: &Vehicle,
    rx: &Vehicle,
    detail: &ObstructionDetail,
    index: &SceneIndex,
    radio: &RadioConfig,
) -> Vec<Ray> {
    let lambda = radio.wavelength();
    let d = tx.position.distance(rx.position);
    let top_edges: Vec<KnifeEdge> = detail
        .vehicles
        .iter()
        .map(|v| KnifeEdge { d_obs: v.d_obs, excess: v.obstacle_height - v.line_height })
        .collect();
    let top_loss = multiple_knife_edge_loss(&top_edges, d, lambda, radio.multi_edge);
    let a = db_to_amplitude(top_loss);
    let ta = Antenna { pos: tx.position, z: tx.antenna_z() };
    let ra = Antenna { pos: rx.position, z: rx.antenna_z() };
    let [direct, ground] = two_ray_rays(ta, ra, radio);
    let mut rays = vec![
        Ray { kind: RayKind::VehicleDiffractionTop, amplitude_factor: direct.amplitude_factor * a, ..direct },
        Ray { amplitude_factor: ground.amplitude_factor * a, ..ground },
    ];
    if !radio.side_paths || top_loss <= 0.0 || d == 0.0 {
        return rays;
    }
    let blockers: Vec<Vec<Point2>> =
        detail.blocking_vehicles().filter_map(|b| index.vehicle(b.id)).map(|v| v.footprint()).collect();
    if blockers.is_empty() {
        return rays;
    }
    for side in [1.0, -1.0] {
        if let Some(ray) = side_ray(tx, rx, &blockers, side, index, radio) {
            rays.push(ray);
        }
    }
    rays
}

/// Path in the horizontal plane around one side (`+1` left of tx→rx, `-1`
/// right) of all blocking footprints.
fn side_ray(
    tx: &Vehicle,
    rx: &Vehicle,
    blockers: &[Vec<Point2>],
    side: f64,
    index: &SceneIndex,
    radio: &RadioConfig,
) -> Option<Ray> {
    let (a, b) = (tx.position, rx.position);
    let d = a.distance(b);
    let u = (b - a) * (1.0 / d);
    let mut edges: Vec<KnifeEdge> = blockers
        .iter()
        .map(|fp| {
            // Outermost vertex on this side.
            let (along, excess) = fp
                .iter()
                .map(|&p| ((p - a).dot(u), side * geometry::signed_offset(p, a, b)))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("footprint has vertices");
            KnifeEdge { d_obs: along.clamp(1e-6 * d, d * (1.0 - 1e-6)), excess }
        })
        .collect();
    edges.sort_by(|p, q| p.d_obs.total_cmp(&q.d_obs));
    let lambda = radio.wavelength();
    let loss = multiple_knife_edge_loss(&edges, d, lambda, radio.multi_edge);

    // Polyline tx -> outermost corners -> rx in world coordinates.
    let normal = Point2::new(-u.y, u.x) * side;
    let mut pts = vec![a];
    pts.extend(edges.iter().filter(|e| e.excess > 0.0).map(|e| a + u * e.d_obs + normal * e.excess));
    pts.push(b);
    for w in pts.windows(2) {
        let blocked = index
            .statics()
            .query_segment_items(w[0], w[1])
            .into_iter()
            .any(|it| index.static_at(it.slot).kind == StaticKind::Building);
        if blocked {
            return None;
        }
    }
    let len2d: f64 = pts.windows(2).map(|w| w[0].distance(w[1])).sum();
    let path = len2d.hypot(tx.antenna_z() - rx.antenna_z());
    let foliage = super::foliage_attenuation_db(&pts, index, radio.frequency_hz);
    Some(Ray::new(RayKind::VehicleDiffractionSide, path, db_to_amplitude(loss + foliage), lambda))
}
