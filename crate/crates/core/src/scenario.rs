//! Scene data model, JSON I/O and synthetic scene generators.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};
use crate::spatial::SpatialIndex;

/// Default antenna height above the roof, in metres.
pub const DEFAULT_ANTENNA_HEIGHT: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Short,
    Tall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: u64,
    /// Footprint centre.
    pub position: Point2,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub antenna_height_above_roof: f64,
    pub class: VehicleClass,
}

impl Vehicle {
    /// Absolute antenna height above the road.
    pub fn antenna_z(&self) -> f64 {
        self.height + self.antenna_height_above_roof
    }

    pub fn footprint(&self) -> Vec<Point2> {
        vehicle_footprint(self)
    }
}

/// Oriented rectangle of the vehicle, counter-clockwise.
pub fn vehicle_footprint(v: &Vehicle) -> Vec<Point2> {
    let (hl, hw) = (0.5 * v.length, 0.5 * v.width);
    [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
        .into_iter()
        .map(|(x, y)| v.position + Point2::new(x, y).rotate(v.heading))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaticKind {
    Building,
    Foliage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticObject {
    pub id: u64,
    pub kind: StaticKind,
    /// Simple polygon, counter-clockwise, no repeated closing vertex.
    pub outline: Vec<Point2>,
    pub permittivity: Option<f64>,
}

/// A validated snapshot. Construct through [`Scene::new`] or the loaders.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    timestamp: f64,
    vehicles: Vec<Vehicle>,
    statics: Vec<StaticObject>,
}

impl Scene {
    /// Validates and normalizes the inputs: static outlines are made
    /// counter-clockwise with any duplicated closing vertex removed.
    pub fn new(timestamp: f64, vehicles: Vec<Vehicle>, mut statics: Vec<StaticObject>) -> Result<Self> {
        if !timestamp.is_finite() {
            return Err(Error::domain("scene timestamp must be finite"));
        }
        let mut seen = HashSet::new();
        for v in &vehicles {
            validate_vehicle(v)?;
            if !seen.insert(v.id) {
                return Err(invalid("vehicle", v.id, "duplicate id"));
            }
        }
        seen.clear();
        for s in &mut statics {
            normalize_static(s)?;
            if !seen.insert(s.id) {
                return Err(invalid("static", s.id, "duplicate id"));
            }
        }
        check_static_overlap(&statics)?;
        Ok(Self { timestamp, vehicles, statics })
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn statics(&self) -> &[StaticObject] {
        &self.statics
    }

    pub fn vehicle(&self, id: u64) -> Option<&Vehicle> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: SceneRecord = serde_json::from_str(text)?;
        rec.into_scene()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SceneRecord::from(self)).expect("scene serializes")
    }
}

fn invalid(kind: &'static str, id: u64, reason: impl Into<String>) -> Error {
    Error::Validation { kind, id, reason: reason.into() }
}

fn validate_vehicle(v: &Vehicle) -> Result<()> {
    let finite = v.position.is_finite()
        && v.heading.is_finite()
        && v.length.is_finite()
        && v.width.is_finite()
        && v.height.is_finite()
        && v.antenna_height_above_roof.is_finite();
    if !finite {
        return Err(invalid("vehicle", v.id, "non-finite value"));
    }
    if v.length <= 0.0 || v.width <= 0.0 || v.height <= 0.0 {
        return Err(invalid("vehicle", v.id, "length, width and height must be positive"));
    }
    if v.antenna_height_above_roof < 0.0 {
        return Err(invalid("vehicle", v.id, "antenna height must be non-negative"));
    }
    Ok(())
}

fn normalize_static(s: &mut StaticObject) -> Result<()> {
    if s.outline.len() > 1 && s.outline.first() == s.outline.last() {
        s.outline.pop();
    }
    if s.outline.len() < 3 {
        return Err(invalid("static", s.id, "outline needs at least 3 vertices"));
    }
    if s.outline.iter().any(|p| !p.is_finite()) {
        return Err(invalid("static", s.id, "non-finite vertex"));
    }
    if !geometry::is_simple(&s.outline) || geometry::area(&s.outline) == 0.0 {
        return Err(invalid("static", s.id, "outline is not a simple polygon"));
    }
    match (s.kind, s.permittivity) {
        (StaticKind::Foliage, Some(_)) => {
            return Err(invalid("static", s.id, "permittivity applies to buildings only"));
        }
        (_, Some(eps)) if !(eps.is_finite() && eps >= 1.0) => {
            return Err(invalid("static", s.id, "relative permittivity must be >= 1"));
        }
        _ => {}
    }
    geometry::make_ccw(&mut s.outline);
    Ok(())
}

fn check_static_overlap(statics: &[StaticObject]) -> Result<()> {
    if statics.len() < 2 {
        return Ok(());
    }
    let index = SpatialIndex::build(statics.iter().map(|s| (s.id, s.outline.clone())));
    for (i, s) in statics.iter().enumerate() {
        let bbox = geometry::BBox::from_points(&s.outline);
        for item in index.query_bbox(&bbox) {
            if item.slot > i && geometry::polygons_overlap(&s.outline, &item.polygon) {
                return Err(invalid("static", s.id, format!("overlaps static {}", item.id)));
            }
        }
    }
    Ok(())
}

/// Snapshots with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    snapshots: Vec<Scene>,
}

impl Trace {
    pub fn new(snapshots: Vec<Scene>) -> Result<Self> {
        for (i, w) in snapshots.windows(2).enumerate() {
            if w[1].timestamp() <= w[0].timestamp() {
                return Err(Error::Trace {
                    index: i + 1,
                    reason: format!("timestamp {} does not follow {}", w[1].timestamp(), w[0].timestamp()),
                });
            }
        }
        Ok(Self { snapshots })
    }

    pub fn snapshots(&self) -> &[Scene] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn at(&self, timestamp: f64) -> Option<&Scene> {
        self.snapshots.iter().find(|s| s.timestamp() == timestamp)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let recs: Vec<SceneRecord> = serde_json::from_str(text)?;
        let mut scenes = Vec::with_capacity(recs.len());
        for (index, rec) in recs.into_iter().enumerate() {
            let scene = rec.into_scene().map_err(|e| Error::Trace { index, reason: e.to_string() })?;
            scenes.push(scene);
        }
        Self::new(scenes)
    }

    pub fn to_json(&self) -> String {
        let recs: Vec<SceneRecord> = self.snapshots.iter().map(SceneRecord::from).collect();
        serde_json::to_string_pretty(&recs).expect("trace serializes")
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    Scene::from_json(&read(path.as_ref())?)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &scene.to_json())
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Trace> {
    Trace::from_json(&read(path.as_ref())?)
}

pub fn save_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &trace.to_json())
}

#[derive(Debug, Serialize, Deserialize)]
struct VehicleRecord {
    id: u64,
    x: f64,
    y: f64,
    heading_rad: f64,
    length: f64,
    width: f64,
    height: f64,
    #[serde(default = "default_antenna")]
    antenna_height: f64,
    class: VehicleClass,
}

fn default_antenna() -> f64 {
    DEFAULT_ANTENNA_HEIGHT
}

#[derive(Debug, Serialize, Deserialize)]
struct StaticRecord {
    id: u64,
    kind: StaticKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permittivity: Option<f64>,
    outline: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneRecord {
    #[serde(default)]
    timestamp: f64,
    #[serde(default)]
    vehicles: Vec<VehicleRecord>,
    #[serde(default)]
    statics: Vec<StaticRecord>,
}

impl SceneRecord {
    fn into_scene(self) -> Result<Scene> {
        let vehicles = self
            .vehicles
            .into_iter()
            .map(|r| Vehicle {
                id: r.id,
                position: Point2::new(r.x, r.y),
                heading: r.heading_rad,
                length: r.length,
                width: r.width,
                height: r.height,
                antenna_height_above_roof: r.antenna_height,
                class: r.class,
            })
            .collect();
        let statics = self
            .statics
            .into_iter()
            .map(|r| StaticObject {
                id: r.id,
                kind: r.kind,
                outline: r.outline.into_iter().map(|[x, y]| Point2::new(x, y)).collect(),
                permittivity: r.permittivity,
            })
            .collect();
        Scene::new(self.timestamp, vehicles, statics)
    }
}

impl From<&Scene> for SceneRecord {
    fn from(s: &Scene) -> Self {
        Self {
            timestamp: s.timestamp,
            vehicles: s
                .vehicles
                .iter()
                .map(|v| VehicleRecord {
                    id: v.id,
                    x: v.position.x,
                    y: v.position.y,
                    heading_rad: v.heading,
                    length: v.length,
                    width: v.width,
                    height: v.height,
                    antenna_height: v.antenna_height_above_roof,
                    class: v.class,
                })
                .collect(),
            statics: s
                .statics
                .iter()
                .map(|o| StaticRecord {
                    id: o.id,
                    kind: o.kind,
                    permittivity: o.permittivity,
                    outline: o.outline.iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        }
    }
}

/// Normal distribution truncated to `[min, max]` by resampling. `sd == 0`
/// gives the constant `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Truncated {
    pub const fn new(mean: f64, sd: f64, min: f64, max: f64) -> Self {
        Self { mean, sd, min, max }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sd <= 0.0 {
            return self.mean.clamp(self.min, self.max);
        }
        let n = Normal::new(self.mean, self.sd).expect("sd is positive");
        for _ in 0..10_000 {
            let x = n.sample(rng);
            if x >= self.min && x <= self.max {
                return x;
            }
        }
        self.mean.clamp(self.min, self.max)
    }
}

/// Per-class dimension distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDims {
    pub height: Truncated,
    pub width: Truncated,
    pub length: Truncated,
}

impl ClassDims {
    /// Passenger cars.
    pub const fn short() -> Self {
        Self {
            height: Truncated::new(1.50, 0.084, 0.5, f64::INFINITY),
            width: Truncated::new(1.75, 0.083, 0.5, f64::INFINITY),
            length: Truncated::new(4.3, 0.35, 3.0, 5.5),
        }
    }

    /// Vans, buses and trucks.
    pub const fn tall() -> Self {
        Self {
            height: Truncated::new(3.35, 0.084, 0.5, f64::INFINITY),
            width: Truncated::new(2.5, 0.0, 0.5, f64::INFINITY),
            length: Truncated::new(8.0, 3.0, 5.0, 18.0),
        }
    }
}

/// How the exponential gaps are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingMode {
    /// Independent gap sequence in every lane.
    #[default]
    PerLane,
    /// One gap sequence along the road; each vehicle takes a uniformly
    /// random lane.
    Merged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighwaySpec {
    pub road_length: f64,
    pub lanes: usize,
    pub lane_width: f64,
    /// Mean of the exponential gap between successive vehicles.
    pub mean_spacing: f64,
    pub spacing: SpacingMode,
    pub tall_fraction: f64,
    pub short: ClassDims,
    pub tall: ClassDims,
    pub antenna_height: f64,
    pub seed: u64,
}

impl HighwaySpec {
    /// Four-lane motorway with the A28 spacing and vehicle mix.
    pub fn a28(seed: u64) -> Self {
        Self {
            road_length: 12_500.0,
            lanes: 4,
            lane_width: 3.5,
            mean_spacing: 51.58,
            spacing: SpacingMode::PerLane,
            tall_fraction: 0.1436,
            short: ClassDims::short(),
            tall: ClassDims::tall(),
            antenna_height: DEFAULT_ANTENNA_HEIGHT,
            seed,
        }
    }

    /// A28 preset with the spacing measured along the road rather than
    /// per lane.
    pub fn a28_merged(seed: u64) -> Self {
        Self { spacing: SpacingMode::Merged, ..Self::a28(seed) }
    }

    /// Density given in vehicles per km per lane.
    pub fn with_density(mut self, veh_per_km_lane: f64) -> Self {
        self.mean_spacing = 1000.0 / veh_per_km_lane;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean_spacing > 0.0 && self.mean_spacing.is_finite()) {
            return Err(Error::domain("mean_spacing must be positive"));
        }
        if !(0.0..=1.0).contains(&self.tall_fraction) {
            return Err(Error::domain("tall_fraction must lie in [0, 1]"));
        }
        if !(self.road_length >= 0.0 && self.lane_width > 0.0) {
            return Err(Error::domain("road_length and lane_width must be positive"));
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn sample_vehicle<R: Rng + ?Sized>(
    rng: &mut R,
    id: u64,
    position: Point2,
    heading: f64,
    tall_fraction: f64,
    short: &ClassDims,
    tall: &ClassDims,
    antenna: f64,
) -> Vehicle {
    let class = if rng.random::<f64>() < tall_fraction { VehicleClass::Tall } else { VehicleClass::Short };
    let dims = match class {
        VehicleClass::Short => short,
        VehicleClass::Tall => tall,
    };
    Vehicle {
        id,
        position,
        heading,
        length: dims.length.sample(rng),
        width: dims.width.sample(rng),
        height: dims.height.sample(rng),
        antenna_height_above_roof: antenna,
        class,
    }
}

/// Straight road along +x. Lanes in the lower half drive east, the rest west.
/// Vehicles are placed by centre with exponential gaps, so footprints may
/// overlap at small gaps.
pub fn synth_highway(spec: &HighwaySpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gap = Exp::new(1.0 / spec.mean_spacing).map_err(|e| Error::domain(e.to_string()))?;
    let lane_pose = |lane: usize| {
        let y = (lane as f64 + 0.5) * spec.lane_width;
        let heading = if lane < spec.lanes.div_ceil(2) { 0.0 } else { std::f64::consts::PI };
        (y, heading)
    };
    let mut vehicles = Vec::new();
    let mut place = |rng: &mut ChaCha8Rng, x: f64, lane: usize| {
        let (y, heading) = lane_pose(lane);
        let id = vehicles.len() as u64;
        vehicles.push(sample_vehicle(
            rng,
            id,
            Point2::new(x, y),
            heading,
            spec.tall_fraction,
            &spec.short,
            &spec.tall,
            spec.antenna_height,
        ));
    };
    match spec.spacing {
        SpacingMode::PerLane => {
            for lane in 0..spec.lanes {
                let mut x = gap.sample(&mut rng);
                while x <= spec.road_length {
                    place(&mut rng, x, lane);
                    x += gap.sample(&mut rng);
                }
            }
        }
        SpacingMode::Merged => {
            let mut x = gap.sample(&mut rng);
            while x <= spec.road_length && spec.lanes > 0 {
                let lane = rng.random_range(0..spec.lanes);
                place(&mut rng, x, lane);
                x += gap.sample(&mut rng);
            }
        }
    }
    Scene::new(0.0, vehicles, Vec::new())
}

/// Manhattan grid: square blocks subdivided into lots, each lot holding a
/// building or a patch of foliage, with two-lane streets between blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct UrbanSpec {
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub block_size: f64,
    pub street_width: f64,
    pub lots_per_side: usize,
    pub setback: f64,
    pub foliage_fraction: f64,
    pub mean_spacing: f64,
    pub tall_fraction: f64,
    pub seed: u64,
}

impl UrbanSpec {
    pub fn new(blocks_x: usize, blocks_y: usize, seed: u64) -> Self {
        Self {
            blocks_x,
            blocks_y,
            block_size: 80.0,
            street_width: 20.0,
            lots_per_side: 2,
            setback: 2.0,
            foliage_fraction: 0.15,
            mean_spacing: 160.0,
            tall_fraction: 0.1436,
            seed,
        }
    }

    /// Grid sized so that the scene holds roughly `n` objects, about 38 %
    /// of them vehicles, at a fixed spatial density.
    pub fn with_object_count(n: usize, seed: u64) -> Self {
        let per_block = 4.0 / 0.62;
        let blocks = (n as f64 / per_block).max(1.0);
        let bx = blocks.sqrt().round().max(1.0);
        let by = (blocks / bx).round().max(1.0);
        Self::new(bx as usize, by as usize, seed)
    }

    pub fn pitch(&self) -> f64 {
        self.block_size + self.street_width
    }
}

pub fn synth_urban(spec: &UrbanSpec) -> Result<Scene> {
    if spec.lots_per_side == 0 || spec.block_size <= 0.0 || spec.street_width <= 0.0 || spec.mean_spacing <= 0.0 {
        return Err(Error::domain("urban spec dimensions must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pitch = spec.pitch();
    let lot = spec.block_size / spec.lots_per_side as f64;
    let mut statics = Vec::new();
    let mut sid = 0u64;
    for bj in 0..spec.blocks_y {
        for bi in 0..spec.blocks_x {
            let ox = bi as f64 * pitch + spec.street_width;
            let oy = bj as f64 * pitch + spec.street_width;
            for lj in 0..spec.lots_per_side {
                for li in 0..spec.lots_per_side {
                    let x0 = ox + li as f64 * lot + spec.setback * rng.random_range(0.5..1.5);
                    let y0 = oy + lj as f64 * lot + spec.setback * rng.random_range(0.5..1.5);
                    let x1 = ox + (li + 1) as f64 * lot - spec.setback * rng.random_range(0.5..1.5);
                    let y1 = oy + (lj + 1) as f64 * lot - spec.setback * rng.random_range(0.5..1.5);
                    let kind = if rng.random::<f64>() < spec.foliage_fraction {
                        StaticKind::Foliage
                    } else {
                        StaticKind::Building
                    };
                    statics.push(StaticObject {
                        id: sid,
                        kind,
                        outline: vec![
                            Point2::new(x0, y0),
                            Point2::new(x1, y0),
                            Point2::new(x1, y1),
                            Point2::new(x0, y1),
                        ],
                        permittivity: None,
                    });
                    sid += 1;
                }
            }
        }
    }

    let gap = Exp::new(1.0 / spec.mean_spacing).map_err(|e| Error::domain(e.to_string()))?;
    let (short, tall) = (ClassDims::short(), ClassDims::tall());
    let width_x = spec.blocks_x as f64 * pitch + spec.street_width;
    let width_y = spec.blocks_y as f64 * pitch + spec.street_width;
    let mut vehicles = Vec::new();
    let mut vid = 0u64;
    let mut lane = |rng: &mut ChaCha8Rng, start: Point2, dir: Point2, len: f64, heading: f64| {
        let mut s = gap.sample(rng);
        while s <= len {
            vehicles.push(sample_vehicle(
                rng,
                vid,
                start + dir * s,
                heading,
                spec.tall_fraction,
                &short,
                &tall,
                DEFAULT_ANTENNA_HEIGHT,
            ));
            vid += 1;
            s += gap.sample(rng);
        }
    };
    let (q1, q3) = (0.25 * spec.street_width, 0.75 * spec.street_width);
    for j in 0..=spec.blocks_y {
        let y = j as f64 * pitch;
        lane(&mut rng, Point2::new(0.0, y + q1), Point2::new(1.0, 0.0), width_x, 0.0);
        lane(&mut rng, Point2::new(width_x, y + q3), Point2::new(-1.0, 0.0), width_x, std::f64::consts::PI);
    }
    for i in 0..=spec.blocks_x {
        let x = i as f64 * pitch;
        let up = std::f64::consts::FRAC_PI_2;
        lane(&mut rng, Point2::new(x + q3, 0.0), Point2::new(0.0, 1.0), width_y, up);
        lane(&mut rng, Point2::new(x + q1, width_y), Point2::new(0.0, -1.0), width_y, -up);
    }
    Scene::new(0.0, vehicles, statics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car(id: u64, x: f64, y: f64) -> Vehicle {
        Vehicle {
            id,
            position: Point2::new(x, y),
            heading: 0.0,
            length: 4.0,
            width: 2.0,
            height: 1.5,
            antenna_height_above_roof: 0.1,
            class: VehicleClass::Short,
        }
    }

    #[test]
    fn footprint_unrotated_and_quarter_turn() {
        let v = car(1, 0.0, 0.0);
        let fp = v.footprint();
        assert_eq!(fp[0], Point2::new(-2.0, -1.0));
        assert_eq!(fp[2], Point2::new(2.0, 1.0));
        let mut r = v.clone();
        r.heading = std::f64::consts::FRAC_PI_2;
        for (p, q) in r.footprint().iter().zip([(1.0, -2.0), (1.0, 2.0), (-1.0, 2.0), (-1.0, -2.0)]) {
            assert!((p.x - q.0).abs() < 1e-12 && (p.y - q.1).abs() < 1e-12);
        }
        assert!(geometry::signed_area(&fp) > 0.0);
    }

    #[test]
    fn duplicate_vehicle_id_names_object() {
        let err = Scene::new(0.0, vec![car(7, 0.0, 0.0), car(7, 10.0, 0.0)], vec![]).unwrap_err();
        assert!(err.to_string().contains("vehicle 7"), "{err}");
    }

    #[test]
    fn nonpositive_dimension_rejected() {
        let mut v = car(3, 0.0, 0.0);
        v.width = 0.0;
        let err = Scene::new(0.0, vec![v], vec![]).unwrap_err();
        assert!(err.to_string().contains("vehicle 3"));
    }

    #[test]
    fn closing_vertex_dropped_and_orientation_fixed() {
        let text = r#"{"timestamp":0,"vehicles":[],"statics":[
            {"id":4,"kind":"building","outline":[[0,0],[0,5],[5,5],[5,0],[0,0]]}]}"#;
        let s = Scene::from_json(text).unwrap();
        assert_eq!(s.statics()[0].outline.len(), 4);
        assert!(geometry::signed_area(&s.statics()[0].outline) > 0.0);
    }

    #[test]
    fn overlapping_statics_rejected() {
        let text = r#"{"timestamp":0,"statics":[
            {"id":1,"kind":"building","outline":[[0,0],[5,0],[5,5],[0,5]]},
            {"id":2,"kind":"foliage","outline":[[4,4],[9,4],[9,9],[4,9]]}]}"#;
        let err = Scene::from_json(text).unwrap_err();
        assert!(err.to_string().contains("static 1") || err.to_string().contains("static 2"));
    }

    #[test]
    fn urban_grid_is_valid_and_mixed() {
        let s = synth_urban(&UrbanSpec::new(3, 3, 5)).unwrap();
        assert_eq!(s.statics().len(), 36);
        assert!(!s.vehicles().is_empty());
    }
}
