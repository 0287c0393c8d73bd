//! Connectivity graph and greedy next-hop relay selection.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::LinkClass;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::model::{ChannelModel, LinkReport};
use crate::plos::q_function;
use crate::scenario::{Scene, VehicleClass};

pub const DEFAULT_X_MAX: f64 = 50.0;
pub const DEFAULT_HOP_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub to: u64,
    pub distance: f64,
    pub class: LinkClass,
    pub rx_power_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerBasis {
    /// Large-scale power plus the keyed fading draw.
    #[default]
    Faded,
    LargeScale,
}

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    position: Point2,
    tall: bool,
    /// Sorted by neighbour id.
    edges: Vec<Edge>,
}

/// Who hears whom above the reception threshold.
#[derive(Debug, Clone)]
pub struct NeighborGraph {
    nodes: Vec<Node>,
    slot: HashMap<u64, usize>,
}

impl NeighborGraph {
    /// Builds the graph from evaluated links. Reports are symmetric in the
    /// endpoints, so each qualifying report yields an edge in both directions.
    pub fn from_reports(scene: &Scene, reports: &[LinkReport], threshold_dbm: f64, basis: PowerBasis) -> Self {
        let mut nodes: Vec<Node> = scene
            .vehicles()
            .iter()
            .map(|v| Node { id: v.id, position: v.position, tall: v.class == VehicleClass::Tall, edges: Vec::new() })
            .collect();
        nodes.sort_by_key(|n| n.id);
        let slot: HashMap<u64, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        for r in reports {
            if r.class == LinkClass::OutOfRange {
                continue;
            }
            let p = match basis {
                PowerBasis::Faded => r.faded,
                PowerBasis::LargeScale => r.large_scale,
            };
            let Some(dbm) = p.dbm().filter(|&x| x >= threshold_dbm) else {
                continue;
            };
            let (Some(&a), Some(&b)) = (slot.get(&r.tx), slot.get(&r.rx)) else {
                continue;
            };
            let e = |to| Edge { to, distance: r.distance, class: r.class, rx_power_dbm: dbm };
            nodes[a].edges.push(e(r.rx));
            nodes[b].edges.push(e(r.tx));
        }
        for n in &mut nodes {
            n.edges.sort_by_key(|e| e.to);
            n.edges.dedup_by_key(|e| e.to);
        }
        Self { nodes, slot }
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, id: u64) -> &[Edge] {
        self.slot.get(&id).map_or(&[], |&i| &self.nodes[i].edges)
    }

    pub fn are_neighbors(&self, a: u64, b: u64) -> bool {
        self.neighbors(a).binary_search_by_key(&b, |e| e.to).is_ok()
    }

    pub fn position(&self, id: u64) -> Option<Point2> {
        self.slot.get(&id).map(|&i| self.nodes[i].position)
    }

    pub fn is_tall(&self, id: u64) -> bool {
        self.slot.get(&id).is_some_and(|&i| self.nodes[i].tall)
    }

    fn dist(&self, a: u64, b: u64) -> f64 {
        match (self.position(a), self.position(b)) {
            (Some(p), Some(q)) => p.distance(q),
            _ => f64::INFINITY,
        }
    }
}

/// Evaluates every pair in the scene and keeps links at or above the threshold.
pub fn build_graph(scene: &Scene, model: &ChannelModel, threshold_dbm: f64, basis: PowerBasis) -> NeighborGraph {
    let reports = model.evaluate_scene(scene);
    NeighborGraph::from_reports(scene, &reports, threshold_dbm, basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "technique")]
pub enum RelayTechnique {
    Farthest,
    MostNewNeighbors,
    Tvr { x_max: f64 },
}

impl RelayTechnique {
    pub fn name(&self) -> &'static str {
        match self {
            RelayTechnique::Farthest => "farthest",
            RelayTechnique::MostNewNeighbors => "most_new_neighbors",
            RelayTechnique::Tvr { .. } => "tvr",
        }
    }
}

/// Candidate with the largest key; ties go to the lowest id.
fn best_by<K: PartialOrd>(cands: impl Iterator<Item = u64>, key: impl Fn(u64) -> K) -> Option<u64> {
    let mut best: Option<(u64, K)> = None;
    for c in cands {
        let k = key(c);
        let keep = matches!(&best, Some((bid, bk)) if *bk > k || (*bk == k && *bid < c));
        if !keep {
            best = Some((c, k));
        }
    }
    best.map(|b| b.0)
}

/// Next relay from `current` toward `dst`, restricted to neighbours strictly
/// closer to `dst` than `current`.
pub fn select_next_hop(graph: &NeighborGraph, current: u64, dst: u64, technique: RelayTechnique) -> Option<u64> {
    let here = graph.dist(current, dst);
    let candidates: Vec<u64> =
        graph.neighbors(current).iter().map(|e| e.to).filter(|&n| graph.dist(n, dst) < here).collect();
    let from_cur = |n: u64| graph.dist(current, n);
    match technique {
        RelayTechnique::Farthest => best_by(candidates.iter().copied(), from_cur),
        RelayTechnique::MostNewNeighbors => best_by(candidates.iter().copied(), |n| {
            graph
                .neighbors(n)
                .iter()
                .filter(|e| e.to != current && !graph.are_neighbors(current, e.to) && graph.dist(e.to, dst) < here)
                .count()
        }),
        RelayTechnique::Tvr { x_max } => {
            let far_tall = best_by(candidates.iter().copied().filter(|&n| graph.is_tall(n)), from_cur);
            let far_short = best_by(candidates.iter().copied().filter(|&n| !graph.is_tall(n)), from_cur);
            match (far_tall, far_short) {
                (Some(t), Some(s)) => Some(if from_cur(s) - from_cur(t) <= x_max { t } else { s }),
                (t, s) => t.or(s),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    /// Hops from source to destination, `None` when the route failed.
    pub hops: Option<usize>,
    pub relays: Vec<u64>,
}

/// Greedy forwarding until the destination is a direct neighbour.
pub fn route(graph: &NeighborGraph, src: u64, dst: u64, technique: RelayTechnique, hop_limit: usize) -> Route {
    let mut relays = Vec::new();
    let mut current = src;
    while !graph.are_neighbors(current, dst) {
        if relays.len() >= hop_limit {
            return Route { hops: None, relays };
        }
        match select_next_hop(graph, current, dst, technique) {
            Some(next) => {
                relays.push(next);
                current = next;
            }
            None => return Route { hops: None, relays },
        }
    }
    Route { hops: Some(relays.len() + 1), relays }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub scene: usize,
    pub src: u64,
    pub dst: u64,
    pub technique: String,
    pub hops: Option<usize>,
    pub relays: Vec<u64>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueSummary {
    pub technique: String,
    /// Share of pairs (with at least one successful technique) on which this
    /// technique achieved the minimum hop count, in percent.
    pub best_route_pct: f64,
    pub success_pct: f64,
    pub mean_hops: f64,
    /// Share of vehicles that relayed at least once, in percent.
    pub relay_usage_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub pairs: usize,
    pub summaries: Vec<TechniqueSummary>,
    pub routes: Vec<RouteRecord>,
}

impl Comparison {
    pub fn summary(&self, technique: &str) -> Option<&TechniqueSummary> {
        self.summaries.iter().find(|s| s.technique == technique)
    }
}

/// Source–destination pairs that are not direct neighbours, drawn
/// deterministically from `seed`.
pub fn sample_pairs(graph: &NeighborGraph, n_pairs: usize, seed: u64) -> Vec<(u64, u64)> {
    let ids: Vec<u64> = graph.ids().collect();
    if ids.len() < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_pairs);
    let mut attempts = 0usize;
    while out.len() < n_pairs && attempts < 100 * n_pairs.max(1) {
        attempts += 1;
        let s = ids[rng.random_range(0..ids.len())];
        let d = ids[rng.random_range(0..ids.len())];
        if s != d && !graph.are_neighbors(s, d) {
            out.push((s, d));
        }
    }
    out
}

/// Runs every technique on the same pair set of each graph.
pub fn compare_techniques(
    graphs: &[NeighborGraph],
    techniques: &[RelayTechnique],
    n_pairs: usize,
    seed: u64,
    hop_limit: usize,
) -> Comparison {
    struct PerScene {
        routes: Vec<RouteRecord>,
        relays: Vec<BTreeSet<u64>>,
        vehicles: usize,
    }
    let per_scene: Vec<PerScene> = graphs
        .par_iter()
        .enumerate()
        .map(|(si, g)| {
            let pairs = sample_pairs(g, n_pairs, seed.wrapping_add(si as u64));
            let mut relays = vec![BTreeSet::new(); techniques.len()];
            let mut routes = Vec::with_capacity(pairs.len() * techniques.len());
            for (src, dst) in pairs {
                let rs: Vec<Route> = techniques.iter().map(|&t| route(g, src, dst, t, hop_limit)).collect();
                let best = rs.iter().filter_map(|r| r.hops).min();
                for (ti, r) in rs.into_iter().enumerate() {
                    relays[ti].extend(r.relays.iter().copied());
                    routes.push(RouteRecord {
                        scene: si,
                        src,
                        dst,
                        technique: techniques[ti].name().to_string(),
                        best: best.is_some() && r.hops == best,
                        hops: r.hops,
                        relays: r.relays,
                    });
                }
            }
            PerScene { routes, relays, vehicles: g.len() }
        })
        .collect();

    let n_tech = techniques.len();
    let total_pairs: usize = per_scene.iter().map(|p| p.routes.len() / n_tech.max(1)).sum();
    let solvable: usize = per_scene
        .iter()
        .flat_map(|p| p.routes.chunks(n_tech.max(1)))
        .filter(|c| c.iter().any(|r| r.hops.is_some()))
        .count();
    let vehicles: usize = per_scene.iter().map(|p| p.vehicles).sum();
    let summaries = techniques
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let mine = || per_scene.iter().flat_map(|p| p.routes.iter().skip(ti).step_by(n_tech));
            let best = mine().filter(|r| r.best).count();
            let ok: Vec<usize> = mine().filter_map(|r| r.hops).collect();
            let used: usize = per_scene.iter().map(|p| p.relays[ti].len()).sum();
            let pct = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
            TechniqueSummary {
                technique: t.name().to_string(),
                best_route_pct: pct(best, solvable),
                success_pct: pct(ok.len(), total_pairs),
                mean_hops: if ok.is_empty() { 0.0 } else { ok.iter().sum::<usize>() as f64 / ok.len() as f64 },
                relay_usage_pct: pct(used, vehicles),
            }
        })
        .collect();
    Comparison { pairs: total_pairs, summaries, routes: per_scene.into_iter().flat_map(|p| p.routes).collect() }
}

/// Distance deficit at which a tall relay and the farthest short relay are
/// equally likely to be the better choice, given normal fits of their
/// distances. Solved by bisection to machine precision.
pub fn x_max_solve(mu_s: f64, sigma_s: f64, mu_t: f64, sigma_t: f64) -> Result<f64> {
    if !(sigma_s > 0.0 && sigma_t > 0.0) {
        return Err(Error::domain("standard deviations must be positive"));
    }
    let f = |x: f64| 1.0 - q_function((x - mu_s) / sigma_s) - q_function((x - mu_t) / sigma_t);
    let (mut lo, mut hi) = (mu_t - 8.0 * sigma_t, mu_s + 8.0 * sigma_s);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || lo >= hi {
        return Err(Error::NoSignChange { lo, hi });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi });
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Probability of at least one tall vehicle within a window of `x_max`
/// metres on a road with exponential spacing of rate `lambda_s` and tall
/// fraction `gamma_tall`.
pub fn p_tall_within(gamma_tall: f64, lambda_s: f64, x_max: f64) -> f64 {
    1.0 - (-gamma_tall * lambda_s * x_max).exp()
}

/// Share of vehicles that have a tall vehicle ahead in `(x + r - x_max, x + r]`,
/// over vehicles whose window lies inside `[0, road_length]`.
pub fn tall_window_frequency(scene: &Scene, road_length: f64, r: f64, x_max: f64) -> Option<f64> {
    let mut xs: Vec<(f64, bool)> =
        scene.vehicles().iter().map(|v| (v.position.x, v.class == VehicleClass::Tall)).collect();
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tall: Vec<f64> = xs.iter().filter(|v| v.1).map(|v| v.0).collect();
    let mut hits = 0usize;
    let mut total = 0usize;
    for &(x, _) in xs.iter().filter(|v| v.0 + r <= road_length) {
        total += 1;
        let (lo, hi) = (x + r - x_max, x + r);
        let i = tall.partition_point(|&t| t <= lo);
        if i < tall.len() && tall[i] <= hi {
            hits += 1;
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_max_symmetric_case() {
        let x = x_max_solve(300.0, 40.0, 300.0, 40.0).unwrap();
        assert!((x - 300.0).abs() < 1e-6);
    }

    #[test]
    fn p_tall_spot_value() {
        assert!((p_tall_within(0.1436, 1.0 / 51.58, 50.0) - 0.130).abs() < 1e-3);
        assert_eq!(p_tall_within(0.1436, 1.0 / 51.58, 0.0), 0.0);
    }

    #[test]
    fn best_by_prefers_lowest_id_on_ties() {
        assert_eq!(best_by([5u64, 3, 9].into_iter(), |_| 1.0), Some(3));
        assert_eq!(best_by([5u64, 3, 9].into_iter(), |c| c as f64), Some(9));
        assert_eq!(best_by(std::iter::empty(), |_: u64| 0.0), None);
    }
}
