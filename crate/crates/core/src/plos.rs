//! Analytical probability of line of sight and packet success rate.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{fresnel_radius_unchecked, LinkClass, SceneIndex, FRESNEL_CLEARANCE};
use crate::error::{Error, Result};
use crate::geometry;
use crate::model::LinkReport;
use crate::scenario::{ClassDims, Scene, Trace, Vehicle, VehicleClass};

/// Upper-tail probability of the standard normal.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileObstacle {
    pub d_obs: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Potential obstacles between two vehicles, ordered along the path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstacleProfile {
    obstacles: Vec<ProfileObstacle>,
}

impl ObstacleProfile {
    pub fn new(d: f64, obstacles: Vec<ProfileObstacle>) -> Result<Self> {
        for (i, o) in obstacles.iter().enumerate() {
            if !(o.d_obs > 0.0 && o.d_obs < d) {
                return Err(Error::domain(format!("obstacle {i}: d_obs {} outside (0, {d})", o.d_obs)));
            }
            if !(o.sigma > 0.0) {
                return Err(Error::domain(format!("obstacle {i}: height deviation must be positive")));
            }
            if i > 0 && o.d_obs <= obstacles[i - 1].d_obs {
                return Err(Error::domain(format!("obstacle {i}: d_obs not strictly increasing")));
            }
        }
        Ok(Self { obstacles })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn obstacles(&self) -> &[ProfileObstacle] {
        &self.obstacles
    }
}

/// LOS probability for antennas at absolute heights `z_i`, `z_j`.
fn p_los_between(z_i: f64, z_j: f64, d: f64, obstacles: &[ProfileObstacle], wavelength: f64) -> f64 {
    obstacles
        .iter()
        .map(|o| {
            let line = (z_j - z_i) * o.d_obs / d + z_i;
            let h = line - FRESNEL_CLEARANCE * fresnel_radius_unchecked(d, o.d_obs, wavelength);
            1.0 - q_function((h - o.mu) / o.sigma)
        })
        .product()
}

/// Probability that none of the profile's obstacles reaches into the
/// Fresnel clearance of the link between vehicles of heights `h_i`, `h_j`
/// carrying antennas `h_a` above the roof.
pub fn p_los_link(h_i: f64, h_j: f64, h_a: f64, d: f64, profile: &ObstacleProfile, wavelength: f64) -> f64 {
    p_los_between(h_i + h_a, h_j + h_a, d, &profile.obstacles, wavelength)
}

/// Distribution of a vehicle height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HeightDensity {
    Fixed(f64),
    Normal { mu: f64, sigma: f64 },
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature nodes (heights) and normalized weights for a density, using
/// `panels` Gauss–Legendre panels over ±5σ.
fn density_rule(h: HeightDensity, panels: usize, gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    match h {
        HeightDensity::Fixed(x) => vec![(x, 1.0)],
        HeightDensity::Normal { mu, sigma } => {
            let (lo, hi) = (-5.0, 5.0);
            let width = (hi - lo) / panels as f64;
            let mut out = Vec::with_capacity(panels * gl.0.len());
            for p in 0..panels {
                let a = lo + p as f64 * width;
                for (&x, &w) in gl.0.iter().zip(&gl.1) {
                    let z = a + 0.5 * width * (x + 1.0);
                    let pdf = (-0.5 * z * z).exp();
                    out.push((mu + sigma * z, 0.5 * width * w * pdf));
                }
            }
            let total: f64 = out.iter().map(|o| o.1).sum();
            out.iter_mut().for_each(|o| o.1 /= total);
            out
        }
    }
}

/// LOS probability averaged over the two vehicle-height densities.
pub fn p_los_unconditional(
    tx: HeightDensity,
    rx: HeightDensity,
    h_a: f64,
    d: f64,
    profile: &ObstacleProfile,
    wavelength: f64,
) -> f64 {
    let gl = gauss_legendre(8);
    let integrate = |panels: usize| {
        let ri = density_rule(tx, panels, &gl);
        let rj = density_rule(rx, panels, &gl);
        let mut acc = 0.0;
        for &(hi, wi) in &ri {
            for &(hj, wj) in &rj {
                acc += wi * wj * p_los_link(hi, hj, h_a, d, profile, wavelength);
            }
        }
        acc
    };
    let mut panels = 4;
    let mut prev = integrate(panels);
    while panels < 256 {
        panels *= 2;
        let next = integrate(panels);
        if (next - prev).abs() < 1e-9 {
            return next;
        }
        prev = next;
    }
    prev
}

/// Mean and deviation of vehicle heights per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightModel {
    pub short: (f64, f64),
    pub tall: (f64, f64),
}

impl Default for HeightModel {
    fn default() -> Self {
        let (s, t) = (ClassDims::short().height, ClassDims::tall().height);
        Self { short: (s.mean, s.sd), tall: (t.mean, t.sd) }
    }
}

impl HeightModel {
    pub fn for_class(&self, class: VehicleClass) -> (f64, f64) {
        match class {
            VehicleClass::Short => self.short,
            VehicleClass::Tall => self.tall,
        }
    }
}

/// LOS probability of the actual link between two vehicles: obstacles are
/// the other vehicles whose footprints meet the segment, with heights taken
/// from the class model rather than the scene.
pub fn p_los_pair(index: &SceneIndex, a: &Vehicle, b: &Vehicle, heights: &HeightModel, wavelength: f64) -> f64 {
    let d = a.position.distance(b.position);
    if d == 0.0 {
        return 1.0;
    }
    let mut obstacles: Vec<ProfileObstacle> = index
        .vehicles()
        .query_segment_items(a.position, b.position)
        .into_iter()
        .filter(|it| it.id != a.id && it.id != b.id)
        .filter_map(|it| {
            let (t0, t1) = geometry::segment_polygon_span(a.position, b.position, &it.polygon)?;
            let (mu, sigma) = heights.for_class(index.vehicle_at(it.slot).class);
            let d_obs = (0.5 * (t0 + t1)).clamp(1e-9, 1.0 - 1e-9) * d;
            Some(ProfileObstacle { d_obs, mu, sigma })
        })
        .collect();
    obstacles.sort_by(|p, q| p.d_obs.total_cmp(&q.d_obs));
    p_los_between(a.antenna_z(), b.antenna_z(), d, &obstacles, wavelength)
}

/// Per-vehicle mean LOS probability over neighbours within `range`.
/// Vehicles without neighbours are absent from the map.
pub fn p_los_nodes(index: &SceneIndex, range: f64, heights: &HeightModel, wavelength: f64) -> HashMap<u64, f64> {
    let pairs = index.pairs_within(range);
    let probs: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (va, vb) = (index.vehicle(a).expect("indexed"), index.vehicle(b).expect("indexed"));
            p_los_pair(index, va, vb, heights, wavelength)
        })
        .collect();
    let mut acc: HashMap<u64, (f64, usize)> = HashMap::new();
    for (&(a, b), &p) in pairs.iter().zip(&probs) {
        for id in [a, b] {
            let e = acc.entry(id).or_insert((0.0, 0));
            e.0 += p;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(id, (s, n))| (id, s / n as f64)).collect()
}

/// Mean LOS probability of one vehicle over its neighbours, `None` when it
/// has none.
pub fn p_los_node(
    index: &SceneIndex,
    vehicle: u64,
    range: f64,
    heights: &HeightModel,
    wavelength: f64,
) -> Result<Option<f64>> {
    let v =
        index.vehicle(vehicle).ok_or(Error::MissingVehicle { id: vehicle, timestamp: index.scene().timestamp() })?;
    let probs: Vec<f64> = index
        .vehicles()
        .query_radius(v.position, range)
        .into_iter()
        .map(|it| index.vehicle_at(it.slot))
        .filter(|o| o.id != v.id && o.position.distance(v.position) <= range)
        .map(|o| p_los_pair(index, v, o, heights, wavelength))
        .collect();
    Ok((!probs.is_empty()).then(|| probs.iter().sum::<f64>() / probs.len() as f64))
}

/// Mean of the per-vehicle values over vehicles that have neighbours.
pub fn p_los_system(scene: &Scene, range: f64, heights: &HeightModel, wavelength: f64) -> Option<f64> {
    let index = SceneIndex::build(scene);
    let nodes = p_los_nodes(&index, range, heights, wavelength);
    if nodes.is_empty() {
        return None;
    }
    // Sum in id order so the result does not depend on hash iteration.
    let mut vals: Vec<(u64, f64)> = nodes.into_iter().collect();
    vals.sort_by_key(|v| v.0);
    Some(vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64)
}

/// Change of a vehicle's LOS probability between two snapshots.
pub fn delta_p_los(
    trace: &Trace,
    vehicle: u64,
    t1: f64,
    t2: f64,
    range: f64,
    heights: &HeightModel,
    wavelength: f64,
) -> Result<f64> {
    let at = |t: f64| -> Result<f64> {
        let scene = trace.at(t).ok_or(Error::MissingSnapshot(t))?;
        let index = SceneIndex::build(scene);
        Ok(p_los_node(&index, vehicle, range, heights, wavelength)?.unwrap_or(0.0))
    };
    let p1 = at(t1)?;
    if t1 == t2 {
        return Ok(0.0);
    }
    Ok((at(t2)? - p1).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub data_rate_mbps: f64,
    pub modulation: String,
    pub sensitivity_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityTable {
    rows: Vec<SensitivityRow>,
}

impl SensitivityTable {
    /// Minimum receiver sensitivity for the 10 MHz DSRC data rates.
    pub fn dsrc() -> Self {
        let rows = [
            (3.0, "BPSK", -85.0),
            (4.5, "BPSK", -84.0),
            (6.0, "QPSK", -82.0),
            (9.0, "QPSK", -80.0),
            (12.0, "QAM-16", -77.0),
            (18.0, "QAM-16", -70.0),
            (24.0, "QAM-64", -69.0),
            (27.0, "QAM-64", -67.0),
        ]
        .into_iter()
        .map(|(r, m, s)| SensitivityRow { data_rate_mbps: r, modulation: m.to_string(), sensitivity_dbm: s })
        .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[SensitivityRow] {
        &self.rows
    }

    pub fn sensitivity(&self, data_rate_mbps: f64) -> Result<f64> {
        self.rows
            .iter()
            .find(|r| r.data_rate_mbps == data_rate_mbps)
            .map(|r| r.sensitivity_dbm)
            .ok_or(Error::UnknownDataRate(data_rate_mbps))
    }
}

impl Default for SensitivityTable {
    fn default() -> Self {
        Self::dsrc()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsrBin {
    pub lo: f64,
    pub hi: f64,
    pub sent: usize,
    pub received: usize,
}

impl PsrBin {
    pub fn psr(&self) -> Option<f64> {
        (self.sent > 0).then(|| self.received as f64 / self.sent as f64)
    }
}

/// One transmission per in-range link, binned by distance. A packet is
/// received when the faded power reaches `sensitivity_dbm`.
pub fn psr_bins(reports: &[LinkReport], sensitivity_dbm: f64, bin_width: f64) -> Vec<PsrBin> {
    let in_range: Vec<&LinkReport> = reports.iter().filter(|r| r.class != LinkClass::OutOfRange).collect();
    let max_d = in_range.iter().map(|r| r.distance).fold(0.0, f64::max);
    let n_bins = ((max_d / bin_width).floor() as usize + 1).max(if in_range.is_empty() { 0 } else { 1 });
    let mut bins: Vec<PsrBin> = (0..n_bins)
        .map(|i| PsrBin { lo: i as f64 * bin_width, hi: (i + 1) as f64 * bin_width, sent: 0, received: 0 })
        .collect();
    for r in in_range {
        let b = &mut bins[(r.distance / bin_width).floor() as usize];
        b.sent += 1;
        if r.faded.at_least(sensitivity_dbm) {
            b.received += 1;
        }
    }
    bins
}

pub fn packet_success_rate(
    reports: &[LinkReport],
    data_rate_mbps: f64,
    table: &SensitivityTable,
    bin_width: f64,
) -> Result<Vec<PsrBin>> {
    Ok(psr_bins(reports, table.sensitivity(data_rate_mbps)?, bin_width))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.6449) - 0.05).abs() < 1e-4);
        for x in [-3.0, -0.2, 0.7, 5.0] {
            assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let x14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((x14 - 2.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn link_probability_limits() {
        let lambda = 0.050812;
        assert_eq!(p_los_link(1.5, 1.5, 0.1, 100.0, &ObstacleProfile::empty(), lambda), 1.0);
        let h = 1.6 - 0.6 * fresnel_radius_unchecked(100.0, 50.0, lambda);
        let at = ObstacleProfile::new(100.0, vec![ProfileObstacle { d_obs: 50.0, mu: h, sigma: 0.1 }]).unwrap();
        assert!((p_los_link(1.5, 1.5, 0.1, 100.0, &at, lambda) - 0.5).abs() < 1e-12);
        let low = ObstacleProfile::new(100.0, vec![ProfileObstacle { d_obs: 50.0, mu: h - 1.0, sigma: 0.1 }]).unwrap();
        assert!((p_los_link(1.5, 1.5, 0.1, 100.0, &low, lambda) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_lookup() {
        let t = SensitivityTable::dsrc();
        assert_eq!(t.sensitivity(3.0).unwrap(), -85.0);
        assert_eq!(t.sensitivity(6.0).unwrap(), -82.0);
        assert!(t.sensitivity(5.0).is_err());
    }
}
