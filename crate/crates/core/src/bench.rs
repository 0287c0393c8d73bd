//! Scaling benchmark on synthetic urban grids.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::{classify_link, LinkClass, SceneIndex};
use crate::error::Result;
use crate::model::ChannelModel;
use crate::scenario::{synth_urban, Scene, UrbanSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_objects: usize,
    pub build_ms: f64,
    pub classify_ms: f64,
    pub refl_diffr_ms: f64,
    pub total_ms: f64,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Times one scene of about `n_objects` objects, single-threaded: index
/// construction, neighbour discovery plus classification of `n_links`
/// links, reflection/diffraction search on the building-blocked ones, and
/// the remaining power and fading evaluation. The scene is timed `repeats`
/// times and the run with the median total is reported.
pub fn bench_scene(
    n_objects: usize,
    n_links: usize,
    seed: u64,
    model: &ChannelModel,
    repeats: usize,
) -> Result<BenchRow> {
    let scene = synth_urban(&UrbanSpec::with_object_count(n_objects, seed))?;
    let mut runs: Vec<BenchRow> = (0..repeats.max(1)).map(|_| time_scene(&scene, n_links, model)).collect();
    runs.sort_by(|a, b| a.total_ms.total_cmp(&b.total_ms));
    Ok(runs[runs.len() / 2])
}

fn time_scene(scene: &Scene, n_links: usize, model: &ChannelModel) -> BenchRow {
    let actual = scene.vehicles().len() + scene.statics().len();
    let t_total = Instant::now();
    let t = Instant::now();
    let index = SceneIndex::build(scene);
    let build_ms = ms(t);

    let t = Instant::now();
    let range = model.ranges.max();
    let mut pairs = Vec::new();
    for v in scene.vehicles() {
        for it in index.vehicles().query_radius(v.position, range) {
            let o = index.vehicle_at(it.slot);
            if o.id > v.id && o.position.distance(v.position) <= range {
                pairs.push((v.id, o.id));
            }
        }
    }
    pairs.sort_unstable();
    let stride = (pairs.len() / n_links.max(1)).max(1);
    let links: Vec<_> = pairs
        .iter()
        .step_by(stride)
        .take(n_links)
        .map(|&(a, b)| {
            let (tx, rx) = (index.vehicle(a).expect("indexed"), index.vehicle(b).expect("indexed"));
            classify_link(&index, tx, rx, &model.radio, &model.ranges)
        })
        .collect();
    let classify_ms = ms(t);

    let t = Instant::now();
    let (blocked, rest): (Vec<_>, Vec<_>) = links.into_iter().partition(|l| l.class == LinkClass::NlosB);
    let mut sink = 0.0;
    for l in blocked {
        sink += model.evaluate(&index, l).faded.as_f64().max(-1e3);
    }
    let refl_diffr_ms = ms(t);

    for l in rest {
        sink += model.evaluate(&index, l).faded.as_f64().max(-1e3);
    }
    std::hint::black_box(sink);
    BenchRow { n_objects: actual, build_ms, classify_ms, refl_diffr_ms, total_ms: ms(t_total) }
}

pub fn run_bench(
    sizes: &[usize],
    n_links: usize,
    seed: u64,
    model: &ChannelModel,
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    sizes.iter().map(|&n| bench_scene(n, n_links, seed, model, repeats)).collect()
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn linear_fit_r2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}
