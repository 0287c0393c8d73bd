//! Geometry-based vehicle-to-vehicle channel model.
//!
//! Scenes of vehicles, buildings and foliage are indexed with bounding-box
//! trees; each link is classified as line of sight, blocked by vehicles or
//! blocked by static objects, and assigned a received power from the
//! matching propagation mechanism plus a density-driven fading term. On top
//! of that sit analytical line-of-sight probabilities, packet success rates
//! and greedy relay selection.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod classify;
pub mod error;
pub mod fading;
pub mod geometry;
pub mod model;
pub mod plos;
pub mod propagation;
pub mod relay;
pub mod scenario;
pub mod spatial;

pub use classify::{
    classify_all, classify_link, fresnel_radius, ClassifiedLink, Environment, LinkClass, RangeConfig, SceneIndex,
};
pub use error::{Error, Result};
pub use fading::FadingConfig;
pub use geometry::Point2;
pub use model::{ChannelModel, LinkReport};
pub use propagation::{RadioConfig, RxPower};
pub use scenario::{HighwaySpec, Scene, StaticKind, StaticObject, Trace, Vehicle, VehicleClass};
pub use spatial::{SearchEllipse, SpatialIndex};
