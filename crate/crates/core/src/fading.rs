//! Density-driven log-normal variation on top of large-scale power.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classify::{LinkClass, SceneIndex};
use crate::error::{Error, Result};
use crate::geometry;
use crate::scenario::Vehicle;
use crate::spatial::SearchEllipse;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingConfig {
    pub los: SigmaRange,
    pub nlosv: SigmaRange,
    pub nlosb: SigmaRange,
    /// Vehicles per km² at which density saturates.
    pub nv_max: f64,
    /// Static footprint area in m² per km² at which density saturates.
    pub as_max: f64,
    /// Optional lower bound on the NLOSv deviation, in dB.
    pub nlosv_floor: Option<f64>,
    pub seed: u64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            los: SigmaRange { min: 3.3, max: 5.2 },
            nlosv: SigmaRange { min: 0.0, max: 5.3 },
            nlosb: SigmaRange { min: 0.0, max: 6.8 },
            nv_max: 255.0,
            as_max: 8.6e6 / 41.3,
            nlosv_floor: None,
            seed: 0,
        }
    }
}

impl FadingConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.los, self.nlosv, self.nlosb] {
            if !(r.min >= 0.0 && r.min <= r.max) {
                return Err(Error::domain("fading sigma range needs 0 <= min <= max"));
            }
        }
        if !(self.nv_max > 0.0 && self.as_max > 0.0) {
            return Err(Error::domain("density saturation values must be positive"));
        }
        Ok(())
    }

    pub fn range_for(&self, class: LinkClass) -> Option<SigmaRange> {
        match class {
            LinkClass::Los => Some(self.los),
            LinkClass::NlosV => Some(self.nlosv),
            LinkClass::NlosB => Some(self.nlosb),
            LinkClass::OutOfRange => None,
        }
    }
}

/// Object density inside a link's search ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DensitySample {
    /// Vehicles per km².
    pub nv: f64,
    /// Static footprint area, m² per km².
    pub as_: f64,
}

/// Counts vehicles (other than the two endpoints) and sums static footprint
/// areas over objects meeting the ellipse with foci at the endpoints and
/// major diameter `range`.
pub fn density_sample(index: &SceneIndex, tx: &Vehicle, rx: &Vehicle, range: f64) -> DensitySample {
    let Some(e) = SearchEllipse::new(tx.position, rx.position, range) else {
        return DensitySample::default();
    };
    let area_km2 = e.area() / 1e6;
    if area_km2 <= 0.0 {
        return DensitySample::default();
    }
    let vehicles =
        index.vehicles().query_ellipse_items(&e).into_iter().filter(|it| it.id != tx.id && it.id != rx.id).count();
    let static_area: f64 =
        index.statics().query_ellipse_items(&e).into_iter().map(|it| geometry::area(&it.polygon)).sum();
    DensitySample { nv: vehicles as f64 / area_km2, as_: static_area / area_km2 }
}

/// Square-root interpolation between the class's minimum and maximum.
pub fn sigma_for_link(sample: DensitySample, class: LinkClass, cfg: &FadingConfig) -> f64 {
    let Some(r) = cfg.range_for(class) else {
        return 0.0;
    };
    let nv = (sample.nv / cfg.nv_max).clamp(0.0, 1.0);
    let as_ = (sample.as_ / cfg.as_max).clamp(0.0, 1.0);
    let sigma = r.min + 0.5 * (r.max - r.min) * (nv.sqrt() + as_.sqrt());
    match (class, cfg.nlosv_floor) {
        (LinkClass::NlosV, Some(floor)) => sigma.max(floor),
        _ => sigma,
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator keyed on the unordered endpoint pair and the timestamp, so the
/// stream does not depend on evaluation order or link direction.
pub fn link_rng(seed: u64, a: u64, b: u64, timestamp: f64) -> ChaCha8Rng {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h = splitmix64(seed);
    for word in [lo, hi, timestamp.to_bits()] {
        h = splitmix64(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Identifies a link at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkKey {
    pub tx: u64,
    pub rx: u64,
    pub timestamp: f64,
}

/// Standard normal draw for a link key.
pub fn keyed_normal(seed: u64, key: LinkKey) -> f64 {
    let mut rng = link_rng(seed, key.tx, key.rx, key.timestamp);
    StandardNormal.sample(&mut rng)
}

/// `pr + N(0, sigma)` with the draw fixed by the seed and link key.
pub fn apply_fading(pr_dbm: f64, sigma: f64, key: LinkKey, cfg: &FadingConfig) -> f64 {
    if sigma == 0.0 {
        return pr_dbm;
    }
    pr_dbm + sigma * keyed_normal(cfg.seed, key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_endpoints() {
        let cfg = FadingConfig::default();
        let zero = DensitySample::default();
        let full = DensitySample { nv: cfg.nv_max, as_: cfg.as_max };
        assert_eq!(sigma_for_link(zero, LinkClass::Los, &cfg), 3.3);
        assert_eq!(sigma_for_link(full, LinkClass::Los, &cfg), 5.2);
        let half = DensitySample { nv: cfg.nv_max, as_: 0.0 };
        assert!((sigma_for_link(half, LinkClass::NlosB, &cfg) - 3.4).abs() < 1e-12);
    }

    #[test]
    fn nlosv_floor_is_optional() {
        let mut cfg = FadingConfig::default();
        assert_eq!(sigma_for_link(DensitySample::default(), LinkClass::NlosV, &cfg), 0.0);
        cfg.nlosv_floor = Some(4.1);
        assert_eq!(sigma_for_link(DensitySample::default(), LinkClass::NlosV, &cfg), 4.1);
    }

    #[test]
    fn keyed_draw_is_direction_free() {
        let k1 = LinkKey { tx: 3, rx: 9, timestamp: 1.5 };
        let k2 = LinkKey { tx: 9, rx: 3, timestamp: 1.5 };
        assert_eq!(keyed_normal(7, k1), keyed_normal(7, k2));
        assert_ne!(keyed_normal(7, k1), keyed_normal(8, k1));
    }
}
