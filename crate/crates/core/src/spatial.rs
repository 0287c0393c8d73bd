//! Binary bounding-rectangle tree over polygon footprints.
//!
//! The tree is built top-down: at every node the objects are sorted by the
//! centre of their bounding box along the node's longer axis (ties broken by
//! id) and split at the median. Leaves hold exactly one object.

use crate::geometry::{self, BBox, Point2};

/// One indexed footprint. `slot` is the object's position in the sequence
/// passed to [`SpatialIndex::build`].
#[derive(Debug, Clone)]
pub struct Item {
    pub id: u64,
    pub slot: usize,
    pub polygon: Vec<Point2>,
    pub bbox: BBox,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bbox: BBox, item: usize },
    Inner { bbox: BBox, left: usize, right: usize },
}

impl Node {
    fn bbox(&self) -> &BBox {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

/// Elliptic search region: points whose distances to the two foci sum to at
/// most `major`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchEllipse {
    pub focus_tx: Point2,
    pub focus_rx: Point2,
    pub major: f64,
}

impl SearchEllipse {
    pub fn new(focus_tx: Point2, focus_rx: Point2, major: f64) -> Option<Self> {
        (focus_tx.distance(focus_rx) <= major).then_some(Self { focus_tx, focus_rx, major })
    }

    pub fn minor(&self) -> f64 {
        let d = self.focus_tx.distance(self.focus_rx);
        (self.major * self.major - d * d).max(0.0).sqrt()
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * 0.25 * self.major * self.minor()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.distance(self.focus_tx) + p.distance(self.focus_rx) <= self.major
    }

    pub fn bbox(&self) -> BBox {
        let c = self.focus_tx.lerp(self.focus_rx, 0.5);
        let a = 0.5 * self.major;
        let b = 0.5 * self.minor();
        let d = self.focus_rx - self.focus_tx;
        let len = d.norm();
        let (ux, uy) = if len > 0.0 { (d.x / len, d.y / len) } else { (1.0, 0.0) };
        let hx = (a * a * ux * ux + b * b * uy * uy).sqrt();
        let hy = (a * a * uy * uy + b * b * ux * ux).sqrt();
        BBox { min: Point2::new(c.x - hx, c.y - hy), max: Point2::new(c.x + hx, c.y + hy) }
    }

    pub fn meets_polygon(&self, poly: &[Point2]) -> bool {
        geometry::polygon_meets_ellipse(poly, self.focus_tx, self.focus_rx, self.major)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpatialIndex {
    nodes: Vec<Node>,
    items: Vec<Item>,
    root: Option<usize>,
}

impl SpatialIndex {
    pub fn build(objects: impl IntoIterator<Item = (u64, Vec<Point2>)>) -> Self {
        let items: Vec<Item> = objects
            .into_iter()
            .enumerate()
            .map(|(slot, (id, polygon))| {
                let bbox = BBox::from_points(&polygon);
                Item { id, slot, polygon, bbox }
            })
            .collect();
        let mut index = Self { nodes: Vec::with_capacity(2 * items.len()), items, root: None };
        if !index.items.is_empty() {
            let mut order: Vec<usize> = (0..index.items.len()).collect();
            index.root = Some(index.build_node(&mut order));
        }
        index
    }

    fn build_node(&mut self, order: &mut [usize]) -> usize {
        let bbox = order.iter().fold(BBox::empty(), |acc, &i| acc.union(&self.items[i].bbox));
        if order.len() == 1 {
            self.nodes.push(Node::Leaf { bbox, item: order[0] });
            return self.nodes.len() - 1;
        }
        let along_x = bbox.width() >= bbox.height();
        let items = &self.items;
        order.sort_by(|&a, &b| {
            let (ca, cb) = (items[a].bbox.center(), items[b].bbox.center());
            let (ka, kb) = if along_x { (ca.x, cb.x) } else { (ca.y, cb.y) };
            ka.total_cmp(&kb).then(items[a].id.cmp(&items[b].id))
        });
        let mid = order.len() / 2;
        let (lo, hi) = order.split_at_mut(mid);
        let left = self.build_node(lo);
        let right = self.build_node(hi);
        self.nodes.push(Node::Inner { bbox, left, right });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn root_bbox(&self) -> Option<BBox> {
        self.root.map(|r| *self.nodes[r].bbox())
    }

    /// Number of levels, counting the leaf level.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], n: usize) -> usize {
            match nodes[n] {
                Node::Leaf { .. } => 1,
                Node::Inner { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        self.root.map_or(0, |r| walk(&self.nodes, r))
    }

    /// Depth of every leaf, in leaf visiting order.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.items.len());
        let mut stack: Vec<(usize, usize)> = self.root.map(|r| (r, 1)).into_iter().collect();
        while let Some((n, depth)) = stack.pop() {
            match self.nodes[n] {
                Node::Leaf { .. } => out.push(depth),
                Node::Inner { left, right, .. } => {
                    stack.push((right, depth + 1));
                    stack.push((left, depth + 1));
                }
            }
        }
        out
    }

    /// Checks the structural invariants: child boxes nest in their parent and
    /// every item appears in exactly one leaf.
    pub fn audit(&self) -> bool {
        let mut seen = vec![0usize; self.items.len()];
        let mut ok = true;
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                Node::Leaf { bbox, item } => {
                    seen[*item] += 1;
                    ok &= bbox.contains_bbox(&self.items[*item].bbox);
                }
                Node::Inner { bbox, left, right } => {
                    ok &= bbox.contains_bbox(self.nodes[*left].bbox());
                    ok &= bbox.contains_bbox(self.nodes[*right].bbox());
                    stack.push(*left);
                    stack.push(*right);
                }
            }
        }
        ok && seen.iter().all(|&c| c == 1)
    }

    /// Leaves whose box passes `keep_box`, in tree order.
    fn collect(&self, mut keep_box: impl FnMut(&BBox) -> bool) -> Vec<&Item> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !keep_box(node.bbox()) {
                continue;
            }
            match *node {
                Node::Leaf { item, .. } => out.push(&self.items[item]),
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Items whose bounding box meets `bbox`.
    pub fn query_bbox(&self, bbox: &BBox) -> Vec<&Item> {
        self.collect(|b| b.intersects(bbox))
    }

    /// Items whose closed footprint meets the closed segment `ab`, sorted by id.
    pub fn query_segment_items(&self, a: Point2, b: Point2) -> Vec<&Item> {
        let mut out: Vec<&Item> = self
            .collect(|bb| bb.intersects_segment(a, b))
            .into_iter()
            .filter(|it| geometry::segment_intersects_polygon(a, b, &it.polygon))
            .collect();
        out.sort_by_key(|it| it.id);
        out
    }

    pub fn query_segment(&self, a: Point2, b: Point2) -> Vec<u64> {
        self.query_segment_items(a, b).into_iter().map(|it| it.id).collect()
    }

    /// Items whose footprint meets the ellipse region, sorted by id.
    pub fn query_ellipse_items(&self, e: &SearchEllipse) -> Vec<&Item> {
        let eb = e.bbox();
        let mut out: Vec<&Item> =
            self.collect(|bb| bb.intersects(&eb)).into_iter().filter(|it| e.meets_polygon(&it.polygon)).collect();
        out.sort_by_key(|it| it.id);
        out
    }

    pub fn query_ellipse(&self, e: &SearchEllipse) -> Vec<u64> {
        self.query_ellipse_items(e).into_iter().map(|it| it.id).collect()
    }

    /// Items whose bounding box meets the square of half-side `radius`
    /// around `center`. Callers filter by exact distance.
    pub fn query_radius(&self, center: Point2, radius: f64) -> Vec<&Item> {
        let b = BBox {
            min: Point2::new(center.x - radius, center.y - radius),
            max: Point2::new(center.x + radius, center.y + radius),
        };
        self.query_bbox(&b)
    }
}

/// Length of segment `ab` lying strictly inside `polygon`.
pub fn segment_polygon_clip(a: Point2, b: Point2, polygon: &[Point2]) -> f64 {
    geometry::segment_polygon_clip(a, b, polygon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(x: f64, y: f64) -> Vec<Point2> {
        vec![Point2::new(x, y), Point2::new(x + 1.0, y), Point2::new(x + 1.0, y + 1.0), Point2::new(x, y + 1.0)]
    }

    #[test]
    fn empty_index_answers_nothing() {
        let idx = SpatialIndex::build(Vec::new());
        assert!(idx.query_segment(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)).is_empty());
        assert_eq!(idx.depth(), 0);
    }

    #[test]
    fn four_squares_hand_built_tree() {
        let idx = SpatialIndex::build(
            [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)]
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| (i as u64, unit_square(x, y))),
        );
        assert_eq!(idx.depth(), 3);
        let root = idx.root_bbox().unwrap();
        assert_eq!(root.min, Point2::new(0.0, 0.0));
        assert_eq!(root.max, Point2::new(11.0, 11.0));
        assert!(idx.audit());
        assert_eq!(idx.query_segment(Point2::new(-1.0, 0.5), Point2::new(20.0, 0.5)), vec![0, 1]);
        assert!(idx.query_segment(Point2::new(20.0, 20.0), Point2::new(30.0, 30.0)).is_empty());
    }

    #[test]
    fn ellipse_bbox_encloses_boundary() {
        let e = SearchEllipse::new(Point2::new(0.0, 0.0), Point2::new(30.0, 40.0), 80.0).unwrap();
        let b = e.bbox();
        let c = Point2::new(15.0, 20.0);
        let u = Point2::new(0.6, 0.8);
        let v = Point2::new(-0.8, 0.6);
        for k in 0..360 {
            let t = (k as f64).to_radians();
            let p = c + u * (40.0 * t.cos()) + v * (0.5 * e.minor() * t.sin());
            assert!(b.contains_point(p) || (p.x - b.max.x).abs() < 1e-9 || (p.y - b.max.y).abs() < 1e-9);
            assert!((e.focus_tx.distance(p) + e.focus_rx.distance(p) - 80.0).abs() < 1e-9);
        }
    }
}
