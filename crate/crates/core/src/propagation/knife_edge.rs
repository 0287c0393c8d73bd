//! Single and multiple knife-edge diffraction loss.

use serde::{Deserialize, Serialize};

use crate::classify::fresnel_radius_unchecked;

/// Diffraction loss in dB of a single knife edge with Fresnel parameter `v`.
pub fn knife_edge_loss(v: f64) -> f64 {
    if v > -0.7 {
        let w = v - 0.1;
        6.9 + 20.0 * ((w * w + 1.0).sqrt() + w).log10()
    } else {
        0.0
    }
}

/// Fresnel parameter of an edge rising `excess` metres above the line of a
/// sub-path of length `span`, at distance `d1` from its start.
pub fn fresnel_parameter(excess: f64, span: f64, d1: f64, wavelength: f64) -> f64 {
    let rf = fresnel_radius_unchecked(span, d1, wavelength);
    if rf == 0.0 {
        return if excess > 0.0 {
            f64::INFINITY
        } else if excess < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
    }
    std::f64::consts::SQRT_2 * excess / rf
}

/// An obstacle edge on a path, measured in path coordinates: `d_obs` along
/// the path from tx, `excess` above (or beside) the straight tx–rx line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnifeEdge {
    pub d_obs: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiEdgeMethod {
    /// Epstein–Peterson cascade.
    EpsteinPeterson,
    /// Epstein–Peterson cascade plus the spreading-loss correction
    /// `C = 10 log10( prod_{i=1..N}(s_i + s_{i+1}) / (s_total * prod_{i=2..N} s_i) )`
    /// where `s_1..s_{N+1}` are the gaps between consecutive active edges
    /// (endpoints included). `C` vanishes for a single edge.
    #[default]
    Corrected,
}

/// Fresnel parameter of each edge with its neighbours as virtual endpoints.
fn cascade_parameters(edges: &[KnifeEdge], d: f64, wavelength: f64) -> Vec<f64> {
    let n = edges.len();
    (0..n)
        .map(|k| {
            let (d_prev, h_prev) = if k == 0 { (0.0, 0.0) } else { (edges[k - 1].d_obs, edges[k - 1].excess) };
            let (d_next, h_next) = if k + 1 == n { (d, 0.0) } else { (edges[k + 1].d_obs, edges[k + 1].excess) };
            let span = d_next - d_prev;
            let d1 = edges[k].d_obs - d_prev;
            let base = if span > 0.0 { h_prev + (h_next - h_prev) * d1 / span } else { h_prev };
            fresnel_parameter(edges[k].excess - base, span, d1, wavelength)
        })
        .collect()
}

/// Edges that actually diffract: repeatedly drop the lowest edge whose loss
/// is zero given its neighbours, then recompute.
fn active_edges(edges: &[KnifeEdge], d: f64, wavelength: f64) -> (Vec<KnifeEdge>, Vec<f64>) {
    let mut active: Vec<KnifeEdge> = edges.to_vec();
    loop {
        let vs = cascade_parameters(&active, d, wavelength);
        let worst = vs
            .iter()
            .enumerate()
            .filter(|(_, v)| knife_edge_loss(**v) == 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i);
        match worst {
            Some(i) if active.len() > 1 => {
                active.remove(i);
            }
            _ => return (active, vs),
        }
    }
}

/// Total loss in dB over an ordered list of edges on a path of length `d`.
pub fn multiple_knife_edge_loss(edges: &[KnifeEdge], d: f64, wavelength: f64, method: MultiEdgeMethod) -> f64 {
    if edges.is_empty() {
        return 0.0;
    }
    let (active, vs) = active_edges(edges, d, wavelength);
    let cascade: f64 = vs.iter().map(|&v| knife_edge_loss(v)).sum();
    if active.len() < 2 || method == MultiEdgeMethod::EpsteinPeterson || cascade == 0.0 {
        return cascade;
    }
    let mut stops = Vec::with_capacity(active.len() + 2);
    stops.push(0.0);
    stops.extend(active.iter().map(|e| e.d_obs));
    stops.push(d);
    let s: Vec<f64> = stops.windows(2).map(|w| w[1] - w[0]).collect();
    if s.iter().any(|&x| x <= 0.0) {
        return cascade;
    }
    let n = active.len();
    let num: f64 = (0..n).map(|i| s[i] + s[i + 1]).product();
    let den: f64 = d * (1..n).map(|i| s[i]).product::<f64>();
    cascade + 10.0 * (num / den).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert_eq!(knife_edge_loss(-0.7), 0.0);
        assert!((knife_edge_loss(0.0) - 6.0328).abs() < 1e-4);
        assert_eq!(knife_edge_loss(-1000.0), 0.0);
    }

    #[test]
    fn single_edge_reduces_exactly() {
        let lambda = 0.050812;
        let e = KnifeEdge { d_obs: 37.0, excess: 0.4 };
        let v = fresnel_parameter(0.4, 100.0, 37.0, lambda);
        let l = multiple_knife_edge_loss(&[e], 100.0, lambda, MultiEdgeMethod::Corrected);
        assert!((l - knife_edge_loss(v)).abs() < 1e-12);
    }

    #[test]
    fn correction_is_nonnegative() {
        let lambda = 0.050812;
        let edges = [KnifeEdge { d_obs: 30.0, excess: 1.0 }, KnifeEdge { d_obs: 70.0, excess: 1.0 }];
        let ep = multiple_knife_edge_loss(&edges, 100.0, lambda, MultiEdgeMethod::EpsteinPeterson);
        let c = multiple_knife_edge_loss(&edges, 100.0, lambda, MultiEdgeMethod::Corrected);
        assert!(c >= ep);
    }
}
