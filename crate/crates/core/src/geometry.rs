//! Planar geometry on the local metric frame.
//!
//! Everything here works on `f64` metres in a flat east/north frame. Polygons
//! are plain vertex slices without a repeated closing vertex; most helpers
//! accept either orientation, and [`make_ccw`] normalizes when it matters.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the local east/north frame, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise rotation by `angle` radians about the origin.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point2,
    pub max: Point2,
}

impl BBox {
    pub fn empty() -> Self {
        Self { min: Point2::new(f64::INFINITY, f64::INFINITY), max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY) }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point2>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.expand_point(*p);
        }
        b
    }

    pub fn expand_point(&mut self, p: Point2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.min.x + self.max.x), 0.5 * (self.min.y + self.max.y))
    }

    pub fn contains_bbox(&self, other: &Self) -> bool {
        self.min.x <= other.min.x && self.min.y <= other.min.y && self.max.x >= other.max.x && self.max.y >= other.max.y
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.min.x <= other.max.x && other.min.x <= self.max.x && self.min.y <= other.max.y && other.min.y <= self.max.y
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Closed segment vs closed rectangle (Liang–Barsky clipping).
    pub fn intersects_segment(&self, a: Point2, b: Point2) -> bool {
        if self.is_empty() {
            return false;
        }
        let d = b - a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (p, q) in
            [(-d.x, a.x - self.min.x), (d.x, self.max.x - a.x), (-d.y, a.y - self.min.y), (d.y, self.max.y - a.y)]
        {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    if r > t1 {
                        return false;
                    }
                    t0 = t0.max(r);
                } else {
                    if r < t0 {
                        return false;
                    }
                    t1 = t1.min(r);
                }
            }
        }
        t0 <= t1
    }
}

/// Signed area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

/// Reverses the vertex order in place when the polygon is clockwise.
pub fn make_ccw(poly: &mut [Point2]) {
    if signed_area(poly) < 0.0 {
        poly.reverse();
    }
}

pub fn edges(poly: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

#[inline]
fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

#[inline]
fn on_segment_collinear(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection test (touching counts).
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment_collinear(c, d, a))
        || (d2 == 0.0 && on_segment_collinear(c, d, b))
        || (d3 == 0.0 && on_segment_collinear(a, b, c))
        || (d4 == 0.0 && on_segment_collinear(a, b, d))
}

/// Proper crossing: the segments meet at a single point interior to both.
pub fn segments_cross_properly(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Parameters `(t, u)` of the intersection point `a + t(b-a) = c + u(d-c)`
/// of two non-parallel lines. `None` for parallel lines.
pub fn line_intersection_params(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<(f64, f64)> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let qp = c - a;
    Some((qp.cross(s) / denom, qp.cross(r) / denom))
}

/// Even-odd point-in-polygon. Boundary points may land on either side; use
/// [`point_on_boundary`] when that matters.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

pub fn point_on_boundary(p: Point2, poly: &[Point2], tol: f64) -> bool {
    edges(poly).any(|(a, b)| point_segment_distance(p, a, b) <= tol)
}

/// Closed region test: boundary points count as inside.
pub fn point_in_closed_polygon(p: Point2, poly: &[Point2]) -> bool {
    point_in_polygon(p, poly) || edges(poly).any(|(a, b)| orient(a, b, p) == 0.0 && on_segment_collinear(a, b, p))
}

/// Does the closed segment `ab` meet the closed polygon region?
pub fn segment_intersects_polygon(a: Point2, b: Point2, poly: &[Point2]) -> bool {
    if edges(poly).any(|(c, d)| segments_intersect(a, b, c, d)) {
        return true;
    }
    // No boundary contact: either fully inside or fully outside.
    point_in_polygon(a, poly)
}

/// Sorted, de-duplicated parameters in `[0, 1]` where segment `ab` meets the
/// polygon boundary, always including both endpoints.
fn boundary_params(a: Point2, b: Point2, poly: &[Point2]) -> Vec<f64> {
    let mut ts = vec![0.0, 1.0];
    let ab = b - a;
    let len2 = ab.dot(ab);
    for (c, d) in edges(poly) {
        match line_intersection_params(a, b, c, d) {
            Some((t, u)) => {
                if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                    ts.push(t);
                }
            }
            None => {
                // Parallel: collinear overlap contributes its endpoints.
                if orient(a, b, c) == 0.0 && len2 > 0.0 {
                    for p in [c, d] {
                        let t = (p - a).dot(ab) / len2;
                        if (0.0..=1.0).contains(&t) {
                            ts.push(t);
                        }
                    }
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Length of the part of segment `ab` strictly inside the polygon. Contact
/// along the boundary has measure zero and contributes nothing.
pub fn segment_polygon_clip(a: Point2, b: Point2, poly: &[Point2]) -> f64 {
    let len = a.distance(b);
    if len == 0.0 {
        return 0.0;
    }
    let ts = boundary_params(a, b, poly);
    let tol = 1e-9 * len.max(1.0);
    let mut inside = 0.0;
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        let mid = a.lerp(b, 0.5 * (t0 + t1));
        if point_in_polygon(mid, poly) && !point_on_boundary(mid, poly, tol) {
            inside += (t1 - t0) * len;
        }
    }
    inside
}

/// The `[t0, t1]` span (segment parameters) over which the closed segment
/// touches the polygon, or `None` when disjoint.
pub fn segment_polygon_span(a: Point2, b: Point2, poly: &[Point2]) -> Option<(f64, f64)> {
    if !segment_intersects_polygon(a, b, poly) {
        return None;
    }
    let ts = boundary_params(a, b, poly);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t in &ts {
        let p = a.lerp(b, t);
        if point_in_closed_polygon(p, poly) || point_on_boundary(p, poly, 1e-9) {
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    if lo > hi {
        // Numerically grazing contact; fall back to the closest boundary parameter.
        let t = ts[ts.len() / 2];
        return Some((t, t));
    }
    Some((lo, hi))
}

/// Minimum of `|p - f1| + |p - f2|` over the closed segment `pq`.
///
/// Closed form: the minimum on the supporting line is either where it crosses
/// the focal segment (value `|f1 - f2|`) or the mirror-image point; by
/// convexity a minimizer outside `[p, q]` moves to the nearer endpoint.
pub fn min_focal_sum_on_segment(p: Point2, q: Point2, f1: Point2, f2: Point2) -> f64 {
    let focal = |x: Point2| x.distance(f1) + x.distance(f2);
    let mut best = focal(p).min(focal(q));
    if segments_intersect(p, q, f1, f2) {
        return f1.distance(f2);
    }
    let dir = q - p;
    let len2 = dir.dot(dir);
    if len2 == 0.0 {
        return best;
    }
    let s1 = orient(p, q, f1);
    let s2 = orient(p, q, f2);
    if s1 * s2 > 0.0 {
        // Same side: reflect f2 across the line.
        let t = (f2 - p).dot(dir) / len2;
        let foot = p + dir * t;
        let mirrored = foot * 2.0 - f2;
        if let Some((_, u)) = line_intersection_params(f1, mirrored, p, q) {
            if (0.0..=1.0).contains(&u) {
                best = best.min(focal(p + dir * u));
            }
        }
    }
    best
}

/// Does the closed polygon region meet the closed ellipse
/// `{x : |x - f1| + |x - f2| <= major}`?
pub fn polygon_meets_ellipse(poly: &[Point2], f1: Point2, f2: Point2, major: f64) -> bool {
    let d = f1.distance(f2);
    if d > major {
        return false;
    }
    // Any point of the focal segment attains the global minimum `d`.
    if segment_intersects_polygon(f1, f2, poly) {
        return true;
    }
    edges(poly).any(|(a, b)| min_focal_sum_on_segment(a, b, f1, f2) <= major)
}

/// Simple-polygon check: no two non-adjacent edges meet, adjacent edges only
/// share their common vertex.
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in (i + 1)..n {
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges must not fold back onto each other.
                let shared = if j == i + 1 { b } else { a };
                let other_a = if j == i + 1 { a } else { b };
                let other_c = if j == i + 1 { d } else { c };
                if orient(other_a, shared, other_c) == 0.0 && (other_a - shared).dot(other_c - shared) > 0.0 {
                    return false;
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Interiors overlap (touching boundaries are allowed).
pub fn polygons_overlap(p: &[Point2], q: &[Point2]) -> bool {
    for (a, b) in edges(p) {
        for (c, d) in edges(q) {
            if segments_cross_properly(a, b, c, d) {
                return true;
            }
        }
    }
    let strictly_inside = |x: Point2, poly: &[Point2]| point_in_polygon(x, poly) && !point_on_boundary(x, poly, 1e-9);
    if p.iter().any(|&x| strictly_inside(x, q)) || q.iter().any(|&x| strictly_inside(x, p)) {
        return true;
    }
    // Identical or boundary-aligned outlines: probe the centroid of each.
    let cp = vertex_centroid(p);
    let cq = vertex_centroid(q);
    (strictly_inside(cp, p) && strictly_inside(cp, q)) || (strictly_inside(cq, q) && strictly_inside(cq, p))
}

pub fn vertex_centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len().max(1) as f64;
    let s = poly.iter().fold(Point2::default(), |acc, &p| acc + p);
    s * (1.0 / n)
}

/// Signed perpendicular offset of `p` from the directed line `a -> b`;
/// positive on the left.
pub fn signed_offset(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return 0.0;
    }
    d.cross(p - a) / len
}

/// Mirror image of `p` across the infinite line through `a` and `b`.
pub fn reflect_across_line(p: Point2, a: Point2, b: Point2) -> Point2 {
    let d = b - a;
    let t = (p - a).dot(d) / d.dot(d);
    let foot = a + d * t;
    foot * 2.0 - p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point2> {
        vec![Point2::new(x0, y0), Point2::new(x0 + s, y0), Point2::new(x0 + s, y0 + s), Point2::new(x0, y0 + s)]
    }

    #[test]
    fn clip_perpendicular_crossing_of_rectangle() {
        let rect = vec![Point2::new(0.0, -5.0), Point2::new(10.0, -5.0), Point2::new(10.0, 5.0), Point2::new(0.0, 5.0)];
        let len = segment_polygon_clip(Point2::new(-20.0, 0.0), Point2::new(30.0, 0.0), &rect);
        assert!((len - 10.0).abs() < 1e-12);
    }

    #[test]
    fn clip_tangent_edge_is_zero() {
        let sq = square(0.0, 0.0, 10.0);
        let along = segment_polygon_clip(Point2::new(-5.0, 10.0), Point2::new(15.0, 10.0), &sq);
        assert_eq!(along, 0.0);
        let corner = segment_polygon_clip(Point2::new(-5.0, 15.0), Point2::new(15.0, -5.0), &square(0.0, 0.0, 10.0));
        // passes through the interior diagonal
        assert!(corner > 0.0);
        let touch = segment_polygon_clip(Point2::new(-5.0, 5.0), Point2::new(5.0, 15.0), &sq);
        assert_eq!(touch, 0.0);
    }

    #[test]
    fn clip_disjoint_and_contained() {
        let sq = square(0.0, 0.0, 10.0);
        assert_eq!(segment_polygon_clip(Point2::new(20.0, 0.0), Point2::new(30.0, 5.0), &sq), 0.0);
        let inner = segment_polygon_clip(Point2::new(2.0, 2.0), Point2::new(5.0, 6.0), &sq);
        assert!((inner - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bbox_segment_cases() {
        let b = BBox { min: Point2::new(0.0, 0.0), max: Point2::new(1.0, 1.0) };
        assert!(b.intersects_segment(Point2::new(-1.0, 0.5), Point2::new(2.0, 0.5)));
        assert!(b.intersects_segment(Point2::new(-1.0, 1.0), Point2::new(2.0, 1.0)));
        assert!(!b.intersects_segment(Point2::new(-1.0, 1.1), Point2::new(2.0, 1.1)));
        assert!(!b.intersects_segment(Point2::new(2.0, 2.0), Point2::new(3.0, -3.0)));
        assert!(b.intersects_segment(Point2::new(0.5, 0.5), Point2::new(0.5, 0.5)));
    }

    #[test]
    fn simple_polygon_detection() {
        assert!(is_simple(&square(0.0, 0.0, 1.0)));
        let bowtie = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        assert!(!is_simple(&bowtie));
        let spike = vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(1.0, 0.0)];
        assert!(!is_simple(&spike));
    }

    #[test]
    fn overlap_allows_shared_walls() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(1.0, 0.0, 1.0);
        assert!(!polygons_overlap(&a, &b));
        let c = square(0.5, 0.5, 1.0);
        assert!(polygons_overlap(&a, &c));
        assert!(polygons_overlap(&a, &a.clone()));
        let inner = square(0.25, 0.25, 0.5);
        assert!(polygons_overlap(&a, &inner));
    }

    #[test]
    fn focal_minimum_matches_reflection_construction() {
        // Horizontal edge y = 2, foci on y = 0 at x = -1 and x = 1.
        let v = min_focal_sum_on_segment(
            Point2::new(-10.0, 2.0),
            Point2::new(10.0, 2.0),
            Point2::new(-1.0, 0.0),
            Point2::new(1.0, 0.0),
        );
        assert!((v - 2.0 * 5.0_f64.sqrt()).abs() < 1e-12);
        // Edge crossing the focal segment.
        let v = min_focal_sum_on_segment(
            Point2::new(0.0, -1.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.0),
            Point2::new(1.0, 0.0),
        );
        assert_eq!(v, 2.0);
    }
}
