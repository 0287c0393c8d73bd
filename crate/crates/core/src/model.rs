//! End-to-end link evaluation: classification, large-scale power, fading.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_all, classify_link, ClassifiedLink, LinkClass, ObstructionDetail, RangeConfig, SceneIndex,
};
use crate::error::Result;
use crate::fading::{apply_fading, density_sample, sigma_for_link, FadingConfig, LinkKey};
use crate::propagation::{received_power, Mechanism, PowerResult, RadioConfig, RxPower};
use crate::scenario::Scene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub tx: u64,
    pub rx: u64,
    pub distance: f64,
    pub class: LinkClass,
    pub detail: ObstructionDetail,
    pub large_scale: RxPower,
    pub mechanism: Mechanism,
    pub sigma_db: f64,
    pub faded: RxPower,
}

impl LinkReport {
    pub fn n_blockers(&self) -> usize {
        self.detail.n_blockers()
    }
}

/// Radio, range and fading parameters bundled for per-link evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub radio: RadioConfig,
    pub ranges: RangeConfig,
    pub fading: FadingConfig,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        RangeConfig::new(self.ranges.r_los, self.ranges.r_nlosv, self.ranges.r_nlosb)?;
        self.fading.validate()
    }

    pub fn power(&self, index: &SceneIndex, link: &ClassifiedLink) -> PowerResult {
        received_power(link, index, &self.radio, &self.ranges)
    }

    pub fn evaluate(&self, index: &SceneIndex, link: ClassifiedLink) -> LinkReport {
        let power = self.power(index, &link);
        let (sigma, faded) = match (link.class, power.rx_power) {
            (LinkClass::OutOfRange, _) | (_, RxPower::NoSignal) => (0.0, power.rx_power),
            (class, RxPower::Dbm(pr)) => {
                let tx = index.vehicle(link.tx).expect("link endpoints are indexed");
                let rx = index.vehicle(link.rx).expect("link endpoints are indexed");
                let sample = density_sample(index, tx, rx, self.ranges.range_for(class));
                let sigma = sigma_for_link(sample, class, &self.fading);
                let key = LinkKey { tx: link.tx, rx: link.rx, timestamp: index.scene().timestamp() };
                (sigma, RxPower::Dbm(apply_fading(pr, sigma, key, &self.fading)))
            }
        };
        LinkReport {
            tx: link.tx,
            rx: link.rx,
            distance: link.distance,
            class: link.class,
            detail: link.detail,
            large_scale: power.rx_power,
            mechanism: power.mechanism,
            sigma_db: sigma,
            faded,
        }
    }

    /// One link between two vehicles of the indexed scene.
    pub fn evaluate_pair(&self, index: &SceneIndex, tx: u64, rx: u64) -> Option<LinkReport> {
        let (a, b) = (index.vehicle(tx)?, index.vehicle(rx)?);
        Some(self.evaluate(index, classify_link(index, a, b, &self.radio, &self.ranges)))
    }

    /// Every pair within the largest range, sorted by `(tx, rx)` with `tx < rx`.
    pub fn evaluate_index(&self, index: &SceneIndex) -> Vec<LinkReport> {
        classify_all(index, &self.radio, &self.ranges).into_par_iter().map(|l| self.evaluate(index, l)).collect()
    }

    pub fn evaluate_scene(&self, scene: &Scene) -> Vec<LinkReport> {
        self.evaluate_index(&SceneIndex::build(scene))
    }
}
