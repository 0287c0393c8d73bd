//! Single-bounce reflections and corner diffractions for building-blocked links.

use serde::{Deserialize, Serialize};

use super::{
    field_reflection, foliage_mel_db_per_m, fresnel_parameter, knife_edge_loss, two_ray_rays, Antenna, RadioConfig,
    Ray, RayKind, Surface,
};
use crate::classify::{fresnel_radius_unchecked, ClassifiedLink, RangeConfig, SceneIndex, FRESNEL_CLEARANCE};
use crate::geometry::{self, Point2};
use crate::scenario::{StaticKind, Vehicle};
use crate::spatial::SearchEllipse;

/// Gap left between a sub-path and the surface it ends on, in metres.
const CONTACT_EPS: f64 = 1e-6;

fn db_to_amplitude(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 20.0)
}

/// Foliage transmission loss in dB along a polyline.
pub fn foliage_attenuation_db(polyline: &[Point2], index: &SceneIndex, frequency_hz: f64) -> f64 {
    let mut metres = 0.0;
    for w in polyline.windows(2) {
        for it in index.statics().query_segment_items(w[0], w[1]) {
            if index.static_at(it.slot).kind == StaticKind::Foliage {
                metres += geometry::segment_polygon_clip(w[0], w[1], &it.polygon);
            }
        }
    }
    foliage_mel_db_per_m(frequency_hz) * metres
}

/// Pulls the `to` end of a segment back toward `from` by [`CONTACT_EPS`].
fn pull_back(from: Point2, to: Point2) -> Point2 {
    let len = from.distance(to);
    if len <= CONTACT_EPS {
        return from;
    }
    to + (from - to) * (CONTACT_EPS / len)
}

fn building_blocks(index: &SceneIndex, a: Point2, b: Point2) -> bool {
    index
        .statics()
        .query_segment_items(a, b)
        .into_iter()
        .any(|it| index.static_at(it.slot).kind == StaticKind::Building)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Reflector {
    Static(u64),
    Vehicle(u64),
}

/// A specular single-bounce path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallReflection {
    pub reflector: Reflector,
    /// Index of the reflecting edge in the reflector's outline.
    pub edge: usize,
    pub point: Point2,
    pub ray: Ray,
}

/// Does a vehicle crossing the leg `a -> b` of an unfolded path of length
/// `total` (the leg starting `offset` metres from tx) intrude into the
/// Fresnel clearance?
#[allow(clippy::too_many_arguments)]
fn vehicle_blocks_leg(
    index: &SceneIndex,
    a: Point2,
    b: Point2,
    offset: f64,
    total: f64,
    h_tx: f64,
    h_rx: f64,
    skip: &[u64],
    lambda: f64,
) -> bool {
    let leg = a.distance(b);
    index.vehicles().query_segment_items(a, b).into_iter().any(|it| {
        if skip.contains(&it.id) {
            return false;
        }
        let Some((t0, t1)) = geometry::segment_polygon_span(a, b, &it.polygon) else {
            return false;
        };
        let s = (offset + 0.5 * (t0 + t1) * leg).clamp(1e-9 * total, total * (1.0 - 1e-9));
        let line = h_tx + (h_rx - h_tx) * s / total;
        let rf = fresnel_radius_unchecked(total, s, lambda);
        index.vehicle_at(it.slot).height >= line - FRESNEL_CLEARANCE * rf
    })
}

/// Specular reflection off `edge` (a→b, polygon counter-clockwise so the
/// outside lies to the right), or `None` when the geometry admits none.
fn mirror_point(tx: Point2, rx: Point2, a: Point2, b: Point2) -> Option<(Point2, f64)> {
    let outside = |p: Point2| (b - a).cross(p - a) < 0.0;
    if !outside(tx) || !outside(rx) {
        return None;
    }
    let image = geometry::reflect_across_line(tx, a, b);
    let (t, u) = geometry::line_intersection_params(image, rx, a, b)?;
    if !(t > 0.0 && t < 1.0 && (0.0..=1.0).contains(&u)) {
        return None;
    }
    Some((a + (b - a) * u, image.distance(rx)))
}

/// All single-bounce wall reflections whose unfolded length is at most `range`.
pub fn wall_reflection_paths(
    tx: &Vehicle,
    rx: &Vehicle,
    index: &SceneIndex,
    radio: &RadioConfig,
    range: f64,
) -> Vec<WallReflection> {
    let (pt, pr) = (tx.position, rx.position);
    let Some(ellipse) = SearchEllipse::new(pt, pr, range) else {
        return Vec::new();
    };
    let (h_tx, h_rx) = (tx.antenna_z(), rx.antenna_z());
    let lambda = radio.wavelength();

    let mut candidates: Vec<(Reflector, &[Point2], f64)> = Vec::new();
    for it in index.statics().query_ellipse_items(&ellipse) {
        let s = index.static_at(it.slot);
        if s.kind == StaticKind::Building {
            let eps = s.permittivity.unwrap_or(radio.wall_permittivity);
            candidates.push((Reflector::Static(s.id), &it.polygon, eps));
        }
    }
    for it in index.vehicles().query_ellipse_items(&ellipse) {
        let v = index.vehicle_at(it.slot);
        if v.id != tx.id && v.id != rx.id && v.height > h_tx.max(h_rx) {
            candidates.push((Reflector::Vehicle(v.id), &it.polygon, radio.wall_permittivity));
        }
    }

    let mut out = Vec::new();
    for (reflector, poly, eps) in candidates {
        let n = poly.len();
        for e in 0..n {
            let (a, b) = (poly[e], poly[(e + 1) % n]);
            let Some((p, unfolded)) = mirror_point(pt, pr, a, b) else {
                continue;
            };
            if unfolded > range {
                continue;
            }
            if building_blocks(index, pt, pull_back(pt, p)) || building_blocks(index, pull_back(pr, p), pr) {
                continue;
            }
            let mut skip = vec![tx.id, rx.id];
            if let Reflector::Vehicle(id) = reflector {
                skip.push(id);
            }
            let leg1 = pt.distance(p);
            if vehicle_blocks_leg(index, pt, p, 0.0, unfolded, h_tx, h_rx, &skip, lambda)
                || vehicle_blocks_leg(index, p, pr, leg1, unfolded, h_tx, h_rx, &skip, lambda)
            {
                continue;
            }
            let dir = p - pt;
            let edge = b - a;
            let sin_theta = (dir.cross(edge).abs() / (dir.norm() * edge.norm())).min(1.0);
            let theta = sin_theta.asin();
            let r = field_reflection(theta, eps, radio.polarization, Surface::Wall);
            let foliage = foliage_attenuation_db(&[pt, p, pr], index, radio.frequency_hz);
            let path = unfolded.hypot(h_tx - h_rx);
            out.push(WallReflection {
                reflector,
                edge: e,
                point: p,
                ray: Ray::new(RayKind::WallReflection, path, r * db_to_amplitude(foliage), lambda),
            });
        }
    }
    out
}

pub fn find_wall_reflections(
    tx: &Vehicle,
    rx: &Vehicle,
    index: &SceneIndex,
    radio: &RadioConfig,
    range: f64,
) -> Vec<Ray> {
    wall_reflection_paths(tx, rx, index, radio, range).into_iter().map(|w| w.ray).collect()
}

/// Rays diffracted around convex corners of the buildings that block the
/// direct path. Each corner must lie in the search ellipse and see both ends.
pub fn find_corner_diffractions(
    tx: &Vehicle,
    rx: &Vehicle,
    index: &SceneIndex,
    radio: &RadioConfig,
    range: f64,
) -> Vec<Ray> {
    let (pt, pr) = (tx.position, rx.position);
    let Some(ellipse) = SearchEllipse::new(pt, pr, range) else {
        return Vec::new();
    };
    let d = pt.distance(pr);
    if d == 0.0 {
        return Vec::new();
    }
    let u = (pr - pt) * (1.0 / d);
    let lambda = radio.wavelength();
    let dh = tx.antenna_z() - rx.antenna_z();
    let mut out = Vec::new();
    for it in index.statics().query_segment_items(pt, pr) {
        if index.static_at(it.slot).kind != StaticKind::Building {
            continue;
        }
        let poly = &it.polygon;
        let n = poly.len();
        for k in 0..n {
            let (prev, v, next) = (poly[(k + n - 1) % n], poly[k], poly[(k + 1) % n]);
            if (v - prev).cross(next - v) <= 0.0 || !ellipse.contains(v) {
                continue;
            }
            let d1 = (v - pt).dot(u);
            if !(d1 > 0.0 && d1 < d) {
                continue;
            }
            if building_blocks(index, pt, pull_back(pt, v)) || building_blocks(index, pull_back(pr, v), pr) {
                continue;
            }
            let h = geometry::signed_offset(v, pt, pr).abs();
            let loss = knife_edge_loss(fresnel_parameter(h, d, d1, lambda));
            let foliage = foliage_attenuation_db(&[pt, v, pr], index, radio.frequency_hz);
            let path = (pt.distance(v) + v.distance(pr)).hypot(dh);
            out.push(Ray::new(RayKind::CornerDiffraction, path, db_to_amplitude(loss + foliage), lambda));
        }
    }
    out
}

/// Reflection and diffraction rays for a building- or foliage-blocked link.
/// When only foliage blocks the direct path, the direct and ground rays are
/// kept and attenuated by the foliage they cross.
pub(crate) fn nlosb_rays(
    tx: &Vehicle,
    rx: &Vehicle,
    link: &ClassifiedLink,
    index: &SceneIndex,
    radio: &RadioConfig,
    ranges: &RangeConfig,
) -> Vec<Ray> {
    let r = ranges.r_nlosb;
    let mut rays = find_wall_reflections(tx, rx, index, radio, r);
    rays.extend(find_corner_diffractions(tx, rx, index, radio, r));
    let building_on_path = link.detail.statics.iter().any(|id| !link.detail.foliage.iter().any(|f| f.id == *id));
    if !building_on_path {
        let loss: f64 =
            foliage_mel_db_per_m(radio.frequency_hz) * link.detail.foliage.iter().map(|f| f.length).sum::<f64>();
        let a = db_to_amplitude(loss);
        let ta = Antenna { pos: tx.position, z: tx.antenna_z() };
        let ra = Antenna { pos: rx.position, z: rx.antenna_z() };
        for ray in two_ray_rays(ta, ra, radio) {
            rays.push(Ray { amplitude_factor: ray.amplitude_factor * a, ..ray });
        }
    }
    rays
}
