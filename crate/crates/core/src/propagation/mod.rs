//! Large-scale received power per link class.

mod knife_edge;
mod nlosb;
mod nlosv;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::classify::{classify_link, ClassifiedLink, LinkClass, RangeConfig, SceneIndex};
use crate::error::{Error, Result};
use crate::fading::link_rng;
use crate::geometry::Point2;

pub use knife_edge::{fresnel_parameter, knife_edge_loss, multiple_knife_edge_loss, KnifeEdge, MultiEdgeMethod};
pub use nlosb::{
    find_corner_diffractions, find_wall_reflections, foliage_attenuation_db, wall_reflection_paths, Reflector,
    WallReflection,
};
pub use nlosv::vehicle_obstruction_field;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[default]
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "seed")]
pub enum PhaseMode {
    /// `2 pi * path_length / wavelength`.
    #[default]
    Geometric,
    /// Uniform phases drawn per ray from the seed and link key.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub frequency_hz: f64,
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub polarization: Polarization,
    pub ground_permittivity: f64,
    pub wall_permittivity: f64,
    pub reference_distance: f64,
    /// Log-distance exponent for the deep-shadow fallback.
    pub path_loss_exponent: f64,
    /// Path loss at the reference distance; free space when `None`.
    pub pl_d0_db: Option<f64>,
    pub phase: PhaseMode,
    pub multi_edge: MultiEdgeMethod,
    /// Add the two horizontal-plane paths around blocking vehicles.
    pub side_paths: bool,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 5.9e9,
            tx_power_dbm: 20.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            polarization: Polarization::Vertical,
            ground_permittivity: 1.003,
            wall_permittivity: 4.5,
            reference_distance: 1.0,
            path_loss_exponent: 2.9,
            pl_d0_db: None,
            phase: PhaseMode::Geometric,
            multi_edge: MultiEdgeMethod::Corrected,
            side_paths: true,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::domain("frequency must be positive"));
        }
        if !(self.reference_distance > 0.0) {
            return Err(Error::domain("reference distance must be positive"));
        }
        if !(self.ground_permittivity >= 1.0 && self.wall_permittivity >= 1.0) {
            return Err(Error::domain("relative permittivity must be >= 1"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn tx_power_w(&self) -> f64 {
        10f64.powf((self.tx_power_dbm - 30.0) / 10.0)
    }

    /// Field strength at the reference distance for unit gain, chosen so a
    /// lone unobstructed ray reproduces free-space power.
    pub fn e0(&self) -> f64 {
        (30.0 * self.tx_power_w()).sqrt() / self.reference_distance
    }

    pub fn free_space_loss_db(&self, d: f64) -> f64 {
        20.0 * (4.0 * PI * d / self.wavelength()).log10()
    }

    pub fn pl_d0(&self) -> f64 {
        self.pl_d0_db.unwrap_or_else(|| self.free_space_loss_db(self.reference_distance))
    }

    /// Free-space received power in dBm, gains included.
    pub fn friis_dbm(&self, d: f64) -> f64 {
        self.tx_power_dbm + self.tx_gain_dbi + self.rx_gain_dbi - self.free_space_loss_db(d)
    }
}

/// Received power: a finite dBm value or the absence of any field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RxPower {
    Dbm(f64),
    NoSignal,
}

impl RxPower {
    pub fn dbm(self) -> Option<f64> {
        match self {
            RxPower::Dbm(x) => Some(x),
            RxPower::NoSignal => None,
        }
    }

    /// dBm with `-inf` for no signal.
    pub fn as_f64(self) -> f64 {
        self.dbm().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn max(self, other: Self) -> Self {
        if other.as_f64() > self.as_f64() {
            other
        } else {
            self
        }
    }

    pub fn at_least(self, threshold_dbm: f64) -> bool {
        self.dbm().is_some_and(|p| p >= threshold_dbm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayKind {
    Los,
    GroundReflection,
    WallReflection,
    CornerDiffraction,
    VehicleDiffractionTop,
    VehicleDiffractionSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub kind: RayKind,
    pub path_length: f64,
    /// Reflection coefficient and/or diffraction attenuation, excluding the
    /// `1/d` spreading.
    pub amplitude_factor: f64,
    pub phase: f64,
}

impl Ray {
    pub fn new(kind: RayKind, path_length: f64, amplitude_factor: f64, wavelength: f64) -> Self {
        Self { kind, path_length, amplitude_factor, phase: geometric_phase(path_length, wavelength) }
    }
}

pub fn geometric_phase(path_length: f64, wavelength: f64) -> f64 {
    (2.0 * PI * path_length / wavelength).rem_euclid(2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    TwoRay,
    KnifeEdge,
    ReflDiffr,
    LogDistanceFallback,
    OutOfRange,
}

impl Mechanism {
    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::TwoRay => "two_ray",
            Mechanism::KnifeEdge => "knife_edge",
            Mechanism::ReflDiffr => "refl_diffr",
            Mechanism::LogDistanceFallback => "log_distance_fallback",
            Mechanism::OutOfRange => "out_of_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub rx_power: RxPower,
    pub rays: Vec<Ray>,
    pub mechanism: Mechanism,
}

/// Phasor sum of the rays, converted to received power.
pub fn combine_efield(rays: &[Ray], radio: &RadioConfig) -> RxPower {
    if rays.is_empty() {
        return RxPower::NoSignal;
    }
    let e0d0 = radio.e0() * radio.reference_distance;
    let (mut re, mut im, mut mag_sum) = (0.0, 0.0, 0.0);
    for r in rays {
        let a = e0d0 / r.path_length.max(radio.reference_distance) * r.amplitude_factor;
        re += a * r.phase.cos();
        im -= a * r.phase.sin();
        mag_sum += a.abs();
    }
    let e2 = re * re + im * im;
    // Cancellation down to rounding noise counts as exact.
    if mag_sum == 0.0 || e2 <= (1e-12 * mag_sum).powi(2) {
        return RxPower::NoSignal;
    }
    let lambda = radio.wavelength();
    let gains = 10f64.powf((radio.tx_gain_dbi + radio.rx_gain_dbi) / 10.0);
    let pr_w = e2 * lambda * lambda / (480.0 * PI * PI) * gains;
    RxPower::Dbm(10.0 * pr_w.log10() + 30.0)
}

/// Log-distance received power in dBm, gains included.
pub fn log_distance_power(d: f64, radio: &RadioConfig) -> Result<f64> {
    let d0 = radio.reference_distance;
    if !(d >= d0) {
        return Err(Error::domain(format!("log-distance model needs d >= d0 ({d} < {d0})")));
    }
    Ok(radio.tx_power_dbm + radio.tx_gain_dbi + radio.rx_gain_dbi
        - radio.pl_d0()
        - 10.0 * radio.path_loss_exponent * (d / d0).log10())
}

/// Mean excess loss through trees in dB per metre.
pub fn foliage_mel_db_per_m(frequency_hz: f64) -> f64 {
    0.79 * (frequency_hz / 1e9).powf(0.61)
}

pub fn foliage_loss(crossing_lengths: &[f64], frequency_hz: f64) -> f64 {
    foliage_mel_db_per_m(frequency_hz) * crossing_lengths.iter().sum::<f64>()
}

/// Fresnel reflection coefficient for a wave arriving from free space at
/// grazing angle `theta` onto a medium of relative permittivity `eps_r`.
/// Vertical polarization returns the parallel coefficient, horizontal the
/// perpendicular one.
pub fn reflection_coefficient(theta: f64, eps_r: f64, polarization: Polarization) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI / 2.0) {
        return Err(Error::domain(format!("grazing angle {theta} outside (0, pi/2]")));
    }
    if !(eps_r >= 1.0 && eps_r.is_finite()) {
        return Err(Error::domain(format!("relative permittivity {eps_r} below 1")));
    }
    let s = theta.sin();
    // eps - cos² written as eps - 1 + sin² to keep precision at grazing angles
    let root = (eps_r - 1.0 + s * s).max(0.0).sqrt();
    Ok(match polarization {
        Polarization::Vertical => (-eps_r * s + root) / (eps_r * s + root),
        Polarization::Horizontal => (s - root) / (s + root),
    })
}

/// Which way the reflecting surface is oriented relative to the antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Surface {
    Ground,
    Wall,
}

/// Reflection factor applied to the received field component. For the
/// in-plane component the sign is flipped so that grazing reflection tends
/// to -1 for both polarizations.
pub(crate) fn field_reflection(theta: f64, eps_r: f64, pol: Polarization, surface: Surface) -> f64 {
    let theta = theta.clamp(f64::MIN_POSITIVE, PI / 2.0);
    let eps = eps_r.max(1.0);
    let in_plane =
        matches!((pol, surface), (Polarization::Vertical, Surface::Ground) | (Polarization::Horizontal, Surface::Wall));
    if in_plane {
        -reflection_coefficient(theta, eps, Polarization::Vertical).expect("domain checked")
    } else {
        reflection_coefficient(theta, eps, Polarization::Horizontal).expect("domain checked")
    }
}

/// Antenna location: ground position plus absolute height above the road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Antenna {
    pub pos: Point2,
    pub z: f64,
}

pub(crate) fn two_ray_rays(tx: Antenna, rx: Antenna, radio: &RadioConfig) -> [Ray; 2] {
    let d = tx.pos.distance(rx.pos);
    let direct = d.hypot(tx.z - rx.z);
    let ground = d.hypot(tx.z + rx.z);
    let theta = (tx.z + rx.z).atan2(d);
    let r = field_reflection(theta, radio.ground_permittivity, radio.polarization, Surface::Ground);
    let lambda = radio.wavelength();
    [Ray::new(RayKind::Los, direct, 1.0, lambda), Ray::new(RayKind::GroundReflection, ground, r, lambda)]
}

/// Direct plus ground-reflected ray with exact path lengths.
pub fn two_ray_power(tx: Antenna, rx: Antenna, radio: &RadioConfig) -> PowerResult {
    let rays = two_ray_rays(tx, rx, radio).to_vec();
    PowerResult { rx_power: combine_efield(&rays, radio), rays, mechanism: Mechanism::TwoRay }
}

fn randomize_phases(rays: &mut [Ray], seed: u64, link: &ClassifiedLink, timestamp: f64) {
    use rand::Rng;
    let mut rng = link_rng(seed ^ 0x9e37_79b9_7f4a_7c15, link.tx, link.rx, timestamp);
    for r in rays {
        r.phase = rng.random_range(0.0..2.0 * PI);
    }
}

/// Large-scale received power for a classified link. Evaluated from the
/// lower-id endpoint so both directions give bit-identical results.
pub fn received_power(
    link: &ClassifiedLink,
    index: &SceneIndex,
    radio: &RadioConfig,
    ranges: &RangeConfig,
) -> PowerResult {
    let none = PowerResult { rx_power: RxPower::NoSignal, rays: Vec::new(), mechanism: Mechanism::OutOfRange };
    let (Some(tx), Some(rx)) = (index.vehicle(link.tx), index.vehicle(link.rx)) else {
        return none;
    };
    if tx.id > rx.id {
        let canonical = classify_link(index, rx, tx, radio, ranges);
        return received_power(&canonical, index, radio, ranges);
    }
    let ta = Antenna { pos: tx.position, z: tx.antenna_z() };
    let ra = Antenna { pos: rx.position, z: rx.antenna_z() };
    let (mut rays, mechanism) = match link.class {
        LinkClass::OutOfRange => return none,
        LinkClass::Los => (two_ray_rays(ta, ra, radio).to_vec(), Mechanism::TwoRay),
        LinkClass::NlosV => (vehicle_obstruction_field(tx, rx, &link.detail, index, radio), Mechanism::KnifeEdge),
        LinkClass::NlosB => (nlosb::nlosb_rays(tx, rx, link, index, radio, ranges), Mechanism::ReflDiffr),
    };
    if let PhaseMode::Random(seed) = radio.phase {
        randomize_phases(&mut rays, seed, link, index.scene().timestamp());
    }
    let rx_power = combine_efield(&rays, radio);
    if mechanism != Mechanism::ReflDiffr {
        return PowerResult { rx_power, rays, mechanism };
    }
    let d = link.distance.max(radio.reference_distance);
    let fallback = RxPower::Dbm(log_distance_power(d, radio).expect("distance clamped to d0"));
    if fallback.as_f64() > rx_power.as_f64() {
        PowerResult { rx_power: fallback, rays, mechanism: Mechanism::LogDistanceFallback }
    } else {
        PowerResult { rx_power, rays, mechanism }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(path: f64, phase: f64) -> Ray {
        Ray { kind: RayKind::Los, path_length: path, amplitude_factor: 1.0, phase }
    }

    #[test]
    fn friis_spot_value() {
        let radio = RadioConfig { tx_power_dbm: 30.0, ..RadioConfig::default() };
        let p = combine_efield(&[ray(100.0, 0.0)], &radio).dbm().unwrap();
        let lambda = radio.wavelength();
        let friis = 30.0 + 20.0 * (lambda / (4.0 * PI * 100.0)).log10();
        assert!((p - friis).abs() < 1e-9);
        assert!((p + 57.9).abs() < 0.05);
    }

    #[test]
    fn phasor_doubling_and_cancellation() {
        let radio = RadioConfig::default();
        let one = combine_efield(&[ray(50.0, 0.0)], &radio).as_f64();
        let two = combine_efield(&[ray(50.0, 0.0), ray(50.0, 0.0)], &radio).as_f64();
        assert!((two - one - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert_eq!(combine_efield(&[ray(50.0, 0.0), ray(50.0, PI)], &radio), RxPower::NoSignal);
        assert_eq!(combine_efield(&[], &radio), RxPower::NoSignal);
    }

    #[test]
    fn reflection_coefficient_cases() {
        for pol in [Polarization::Vertical, Polarization::Horizontal] {
            assert!(reflection_coefficient(0.3, 1.0, pol).unwrap().abs() < 1e-15);
        }
        let r = reflection_coefficient(PI / 2.0, 4.0, Polarization::Horizontal).unwrap();
        assert!((r + 1.0 / 3.0).abs() < 1e-15);
        let g = reflection_coefficient(1e-9, 4.0, Polarization::Horizontal).unwrap();
        assert!((g + 1.0).abs() < 1e-6);
        assert!(reflection_coefficient(0.0, 4.0, Polarization::Vertical).is_err());
        assert!(reflection_coefficient(0.5, 0.5, Polarization::Vertical).is_err());
    }

    #[test]
    fn log_distance_spot_value() {
        let radio = RadioConfig { tx_power_dbm: 10.0, ..RadioConfig::default() };
        assert!((radio.pl_d0() - 47.86).abs() < 0.01);
        let p = log_distance_power(100.0, &radio).unwrap();
        assert!((p + 95.9).abs() < 0.05);
        assert!(log_distance_power(0.5, &radio).is_err());
    }

    #[test]
    fn foliage_mel_at_dsrc() {
        let mel = foliage_mel_db_per_m(5.9e9);
        assert!((mel - 2.3).abs() < 0.05);
        assert!((foliage_loss(&[10.0], 5.9e9) - 23.33).abs() < 0.01);
        assert_eq!(foliage_loss(&[], 5.9e9), 0.0);
    }
}
