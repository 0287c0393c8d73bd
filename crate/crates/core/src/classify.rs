//! LOS / NLOSv / NLOSb link classification.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};
use crate::propagation::RadioConfig;
use crate::scenario::{Scene, StaticKind, StaticObject, Vehicle};
use crate::spatial::SpatialIndex;

/// Fraction of the first Fresnel zone radius that must stay clear.
pub const FRESNEL_CLEARANCE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkClass {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOSv")]
    NlosV,
    #[serde(rename = "NLOSb")]
    NlosB,
    #[serde(rename = "OutOfRange")]
    OutOfRange,
}

impl LinkClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::Los => "LOS",
            LinkClass::NlosV => "NLOSv",
            LinkClass::NlosB => "NLOSb",
            LinkClass::OutOfRange => "OutOfRange",
        }
    }
}

impl std::fmt::Display for LinkClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    Highway,
    Urban,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeConfig {
    pub r_los: f64,
    pub r_nlosv: f64,
    pub r_nlosb: f64,
}

impl RangeConfig {
    pub fn new(r_los: f64, r_nlosv: f64, r_nlosb: f64) -> Result<Self> {
        if !(r_los > 0.0 && r_nlosv > 0.0 && r_nlosb > 0.0) {
            return Err(Error::domain("communication ranges must be positive"));
        }
        Ok(Self { r_los, r_nlosv, r_nlosb })
    }

    pub fn for_environment(env: Environment) -> Self {
        match env {
            Environment::Highway => Self { r_los: 1000.0, r_nlosv: 400.0, r_nlosb: 300.0 },
            Environment::Urban => Self { r_los: 500.0, r_nlosv: 400.0, r_nlosb: 300.0 },
        }
    }

    pub fn max(&self) -> f64 {
        self.r_los.max(self.r_nlosv).max(self.r_nlosb)
    }

    /// Maximum range for a class; `OutOfRange` maps to the largest range.
    pub fn range_for(&self, class: LinkClass) -> f64 {
        match class {
            LinkClass::Los => self.r_los,
            LinkClass::NlosV => self.r_nlosv,
            LinkClass::NlosB => self.r_nlosb,
            LinkClass::OutOfRange => self.max(),
        }
    }
}

impl Default for RangeConfig {
    fn default() -> Self {
        Self::for_environment(Environment::Highway)
    }
}

/// Radius of the first Fresnel zone at `d_obs` along a path of length `d`.
pub fn fresnel_radius(d: f64, d_obs: f64, wavelength: f64) -> Result<f64> {
    if !(d_obs > 0.0 && d_obs < d) || !(wavelength > 0.0) {
        return Err(Error::domain(format!("fresnel radius needs 0 < d_obs < d (d = {d}, d_obs = {d_obs})")));
    }
    Ok(fresnel_radius_unchecked(d, d_obs, wavelength))
}

pub(crate) fn fresnel_radius_unchecked(d: f64, d_obs: f64, wavelength: f64) -> f64 {
    (wavelength * d_obs * (d - d_obs) / d).max(0.0).sqrt()
}

/// A vehicle whose footprint meets the tx–rx segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleObstruction {
    pub id: u64,
    /// Distance from tx to the obstacle along the path.
    pub d_obs: f64,
    pub obstacle_height: f64,
    /// Height of the antenna line at `d_obs`.
    pub line_height: f64,
    /// Line height minus the Fresnel clearance.
    pub effective_height: f64,
    pub fresnel_radius: f64,
    pub blocks: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoliageCrossing {
    pub id: u64,
    pub length: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstructionDetail {
    /// Statics on the path, ordered by where the path enters them.
    pub statics: Vec<u64>,
    /// Vehicles on the path ordered by `d_obs`, blocking or not.
    pub vehicles: Vec<VehicleObstruction>,
    pub foliage: Vec<FoliageCrossing>,
}

impl ObstructionDetail {
    pub fn blocking_vehicles(&self) -> impl Iterator<Item = &VehicleObstruction> {
        self.vehicles.iter().filter(|v| v.blocks)
    }

    pub fn n_blockers(&self) -> usize {
        self.statics.len() + self.blocking_vehicles().count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedLink {
    pub tx: u64,
    pub rx: u64,
    pub distance: f64,
    pub class: LinkClass,
    pub detail: ObstructionDetail,
}

/// A scene together with its static and vehicle indices.
#[derive(Debug)]
pub struct SceneIndex<'s> {
    scene: &'s Scene,
    statics: SpatialIndex,
    vehicles: SpatialIndex,
    vehicle_slot: HashMap<u64, usize>,
}

impl<'s> SceneIndex<'s> {
    pub fn build(scene: &'s Scene) -> Self {
        let (statics, vehicles) = rayon::join(
            || SpatialIndex::build(scene.statics().iter().map(|s| (s.id, s.outline.clone()))),
            || SpatialIndex::build(scene.vehicles().iter().map(|v| (v.id, v.footprint()))),
        );
        let vehicle_slot = scene.vehicles().iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        Self { scene, statics, vehicles, vehicle_slot }
    }

    pub fn scene(&self) -> &'s Scene {
        self.scene
    }

    pub fn statics(&self) -> &SpatialIndex {
        &self.statics
    }

    pub fn vehicles(&self) -> &SpatialIndex {
        &self.vehicles
    }

    pub fn vehicle(&self, id: u64) -> Option<&'s Vehicle> {
        self.vehicle_slot.get(&id).map(|&i| &self.scene.vehicles()[i])
    }

    pub fn static_at(&self, slot: usize) -> &'s StaticObject {
        &self.scene.statics()[slot]
    }

    pub fn vehicle_at(&self, slot: usize) -> &'s Vehicle {
        &self.scene.vehicles()[slot]
    }

    /// Unordered vehicle pairs `(a, b)` with `a < b` whose centres are at
    /// most `range` apart, sorted.
    pub fn pairs_within(&self, range: f64) -> Vec<(u64, u64)> {
        let mut pairs: Vec<(u64, u64)> = self
            .scene
            .vehicles()
            .par_iter()
            .flat_map_iter(|v| {
                self.vehicles
                    .query_radius(v.position, range)
                    .into_iter()
                    .filter(move |it| {
                        let o = self.vehicle_at(it.slot);
                        o.id > v.id && o.position.distance(v.position) <= range
                    })
                    .map(move |it| (v.id, it.id))
                    .collect::<Vec<_>>()
            })
            .collect();
        pairs.sort_unstable();
        pairs
    }
}

/// Vehicles (other than the endpoints) meeting the segment, with their Fresnel
/// test evaluated. Computed from the endpoint with the lower id so that the
/// result is exactly symmetric.
fn vehicle_obstructions(index: &SceneIndex, tx: &Vehicle, rx: &Vehicle, wavelength: f64) -> Vec<VehicleObstruction> {
    let flipped = tx.id > rx.id;
    let (a, b) = if flipped { (rx, tx) } else { (tx, rx) };
    let d = a.position.distance(b.position);
    let (ha, hb) = (a.antenna_z(), b.antenna_z());
    let mut out: Vec<VehicleObstruction> = index
        .vehicles()
        .query_segment_items(a.position, b.position)
        .into_iter()
        .filter(|it| it.id != a.id && it.id != b.id)
        .filter_map(|it| {
            let (t0, t1) = geometry::segment_polygon_span(a.position, b.position, &it.polygon)?;
            let t = (0.5 * (t0 + t1)).clamp(1e-9, 1.0 - 1e-9);
            let d_obs = t * d;
            let line = ha + (hb - ha) * t;
            let rf = if d > 0.0 { fresnel_radius_unchecked(d, d_obs, wavelength) } else { 0.0 };
            let effective = line - FRESNEL_CLEARANCE * rf;
            let height = index.vehicle_at(it.slot).height;
            Some(VehicleObstruction {
                id: it.id,
                d_obs: if flipped { d - d_obs } else { d_obs },
                obstacle_height: height,
                line_height: line,
                effective_height: effective,
                fresnel_radius: rf,
                blocks: height >= effective,
            })
        })
        .collect();
    out.sort_by(|p, q| p.d_obs.total_cmp(&q.d_obs).then(p.id.cmp(&q.id)));
    out
}

fn static_obstructions(index: &SceneIndex, a: Point2, b: Point2) -> (Vec<u64>, Vec<FoliageCrossing>) {
    let mut hits: Vec<(f64, u64)> = Vec::new();
    let mut foliage = Vec::new();
    for it in index.statics().query_segment_items(a, b) {
        let entry = geometry::segment_polygon_span(a, b, &it.polygon).map_or(0.0, |s| s.0);
        hits.push((entry, it.id));
        if index.static_at(it.slot).kind == StaticKind::Foliage {
            foliage.push(FoliageCrossing { id: it.id, length: geometry::segment_polygon_clip(a, b, &it.polygon) });
        }
    }
    hits.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    (hits.into_iter().map(|h| h.1).collect(), foliage)
}

/// Classifies one link. Statics take precedence over vehicles; the class
/// range is applied after the class is known.
pub fn classify_link(
    index: &SceneIndex,
    tx: &Vehicle,
    rx: &Vehicle,
    radio: &RadioConfig,
    ranges: &RangeConfig,
) -> ClassifiedLink {
    let distance = tx.position.distance(rx.position);
    let mut link = ClassifiedLink {
        tx: tx.id,
        rx: rx.id,
        distance,
        class: LinkClass::OutOfRange,
        detail: ObstructionDetail::default(),
    };
    if distance > ranges.max() {
        return link;
    }
    let (statics, foliage) = static_obstructions(index, tx.position, rx.position);
    let class = if !statics.is_empty() {
        link.detail.statics = statics;
        link.detail.foliage = foliage;
        LinkClass::NlosB
    } else {
        let vehicles = vehicle_obstructions(index, tx, rx, radio.wavelength());
        let blocked = vehicles.iter().any(|v| v.blocks);
        link.detail.vehicles = vehicles;
        if blocked {
            LinkClass::NlosV
        } else {
            LinkClass::Los
        }
    };
    link.class = if distance > ranges.range_for(class) { LinkClass::OutOfRange } else { class };
    link
}

/// Every unordered pair within the largest configured range, ordered by
/// `(min id, max id)`; the lower id is reported as tx.
pub fn classify_all(index: &SceneIndex, radio: &RadioConfig, ranges: &RangeConfig) -> Vec<ClassifiedLink> {
    index
        .pairs_within(ranges.max())
        .into_par_iter()
        .map(|(a, b)| {
            let (tx, rx) = (index.vehicle(a).expect("indexed"), index.vehicle(b).expect("indexed"));
            classify_link(index, tx, rx, radio, ranges)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{StaticObject, VehicleClass};

    fn veh(id: u64, x: f64, height: f64) -> Vehicle {
        Vehicle {
            id,
            position: Point2::new(x, 0.0),
            heading: 0.0,
            length: 4.0,
            width: 2.0,
            height,
            antenna_height_above_roof: 0.1,
            class: if height > 2.5 { VehicleClass::Tall } else { VehicleClass::Short },
        }
    }

    #[test]
    fn fresnel_radius_midpoint() {
        let r = fresnel_radius(100.0, 50.0, 0.050812).unwrap();
        assert!((r - 1.127).abs() < 5e-4);
        assert!(fresnel_radius(100.0, 0.0, 0.05).is_err());
        assert!(fresnel_radius(100.0, 100.0, 0.05).is_err());
    }

    #[test]
    fn van_between_cars_is_nlosv_and_building_takes_precedence() {
        let vs = vec![veh(1, 0.0, 1.5), veh(2, 25.0, 3.0), veh(3, 50.0, 1.5)];
        let scene = Scene::new(0.0, vs.clone(), vec![]).unwrap();
        let idx = SceneIndex::build(&scene);
        let radio = RadioConfig::default();
        let ranges = RangeConfig::default();
        let l = classify_link(&idx, &vs[0], &vs[2], &radio, &ranges);
        assert_eq!(l.class, LinkClass::NlosV);
        assert_eq!(l.detail.vehicles.len(), 1);
        assert!((l.detail.vehicles[0].d_obs - 25.0).abs() < 1e-9);

        let wall = StaticObject {
            id: 9,
            kind: StaticKind::Building,
            outline: vec![
                Point2::new(30.0, -5.0),
                Point2::new(35.0, -5.0),
                Point2::new(35.0, 5.0),
                Point2::new(30.0, 5.0),
            ],
            permittivity: None,
        };
        let scene = Scene::new(0.0, vs.clone(), vec![wall]).unwrap();
        let idx = SceneIndex::build(&scene);
        let l = classify_link(&idx, &vs[0], &vs[2], &radio, &ranges);
        assert_eq!(l.class, LinkClass::NlosB);
        assert_eq!(l.detail.statics, vec![9]);
        assert!(l.detail.vehicles.is_empty());
    }

    #[test]
    fn class_range_applies_after_classification() {
        let vs = vec![veh(1, 0.0, 1.5), veh(2, 200.0, 3.0), veh(3, 450.0, 1.5)];
        let scene = Scene::new(0.0, vs.clone(), vec![]).unwrap();
        let idx = SceneIndex::build(&scene);
        let l = classify_link(&idx, &vs[0], &vs[2], &RadioConfig::default(), &RangeConfig::default());
        // blocked by the van, and 450 m exceeds the 400 m NLOSv range
        assert_eq!(l.class, LinkClass::OutOfRange);
        let l = classify_link(&idx, &vs[0], &vs[1], &RadioConfig::default(), &RangeConfig::default());
        assert_eq!(l.class, LinkClass::Los);
    }
}
