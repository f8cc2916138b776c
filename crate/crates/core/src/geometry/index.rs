//! Exact nearest-neighbour index over a point cloud.
//!
//! Small clouds are scanned linearly; larger ones use a median-split k-d tree.
//! Every query is exact. Equal distances resolve to the lowest point index.

use super::point::{dist_sq, Point, PointCloud};
use crate::error::{CidError, Result};

/// Clouds below this size are answered by a linear scan.
pub const LINEAR_SCAN_THRESHOLD: usize = 64;

const LEAF_SIZE: usize = 8;

/// Neighbours kept per point in the proximity graph.
const GRAPH_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { left: u32, right: u32 },
}

#[derive(Debug, Clone)]
struct KdTree {
    nodes: Vec<Node>,
    /// Tight bounding box `[lo, hi]` of the points under each node.
    boxes: Vec<[[f64; 3]; 2]>,
    /// Points in tree order.
    pts: Vec<[f64; 3]>,
    /// Original index of each tree-ordered point.
    ids: Vec<u32>,
}

/// Running best candidate of a nearest-neighbour search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Nearest {
    pub dist_sq: f64,
    pub index: usize,
}

impl Nearest {
    #[inline]
    fn offer(&mut self, d: f64, index: usize) {
        if d < self.dist_sq || (d == self.dist_sq && index < self.index) {
            self.dist_sq = d;
            self.index = index;
        }
    }
}

/// Immutable exact nearest-neighbour structure. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<[f64; 3]>,
    dim: usize,
    tree: Option<KdTree>,
    /// `GRAPH_DEGREE` nearest other points of each point, flattened. Only a
    /// search hint: queries stay exact without it.
    graph: Vec<u32>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Self {
        let points = cloud.points().to_vec();
        let tree = (points.len() >= LINEAR_SCAN_THRESHOLD).then(|| KdTree::build(&points));
        let graph = match &tree {
            Some(t) => (0..points.len()).flat_map(|i| t.k_nearest(&points[i], i)).collect(),
            None => Vec::new(),
        };
        SpatialIndex {
            points,
            dim: cloud.dim(),
            tree,
            graph,
        }
    }

    /// Index that always answers by linear scan, regardless of size.
    pub fn build_linear(cloud: &PointCloud) -> Self {
        SpatialIndex {
            points: cloud.points().to_vec(),
            dim: cloud.dim(),
            tree: None,
            graph: Vec::new(),
        }
    }

    /// Proximity-graph neighbours of point `i`; empty for linear-scan indexes.
    #[inline]
    pub(crate) fn neighbours(&self, i: usize) -> &[u32] {
        if self.graph.is_empty() {
            &[]
        } else {
            &self.graph[i * GRAPH_DEGREE..(i + 1) * GRAPH_DEGREE]
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn uses_tree(&self) -> bool {
        self.tree.is_some()
    }

    pub(crate) fn check_point(&self, q: &Point) -> Result<()> {
        if q.dim() != self.dim {
            return Err(CidError::DimensionMismatch {
                expected: self.dim,
                got: q.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.points.len() {
            Ok(())
        } else {
            Err(CidError::IndexOutOfRange {
                index: i,
                len: self.points.len(),
            })
        }
    }

    /// Nearest indexed point to `q` as `(index, euclidean distance)`.
    pub fn nearest(&self, q: &Point) -> Result<(usize, f64)> {
        self.check_point(q)?;
        let n = self.nearest_raw(q.coords());
        Ok((n.index, n.dist_sq.sqrt()))
    }

    pub(crate) fn nearest_raw(&self, q: &[f64; 3]) -> Nearest {
        let mut best = Nearest {
            dist_sq: f64::INFINITY,
            index: usize::MAX,
        };
        self.search(q, &mut best, f64::NEG_INFINITY);
        best
    }

    /// Nearest-neighbour search that gives up as soon as any point lies within
    /// `stop_sq` (squared). `best` may be pre-seeded with a known candidate.
    /// Returns `true` when stopped early, in which case `best` is only an upper bound.
    #[inline]
    pub(crate) fn search(&self, q: &[f64; 3], best: &mut Nearest, stop_sq: f64) -> bool {
        if best.dist_sq <= stop_sq {
            return true;
        }
        match &self.tree {
            Some(tree) => tree.search(0, q, best, stop_sq),
            None => {
                for (i, p) in self.points.iter().enumerate() {
                    best.offer(dist_sq(q, p), i);
                    if best.dist_sq <= stop_sq {
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// Exact Euclidean distance from `q` to the nearest indexed point.
pub fn point_to_set_distance(q: &Point, index: &SpatialIndex) -> Result<f64> {
    index.nearest(q).map(|(_, d)| d)
}

impl KdTree {
    fn build(points: &[[f64; 3]]) -> Self {
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        let mut boxes = Vec::with_capacity(nodes.capacity());
        Self::build_node(points, &mut ids, 0, &mut nodes, &mut boxes);
        let pts = ids.iter().map(|&i| points[i as usize]).collect();
        KdTree { nodes, boxes, pts, ids }
    }

    fn build_node(
        points: &[[f64; 3]],
        ids: &mut [u32],
        offset: usize,
        nodes: &mut Vec<Node>,
        boxes: &mut Vec<[[f64; 3]; 2]>,
    ) -> u32 {
        let slot = nodes.len() as u32;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in ids.iter() {
            let p = &points[i as usize];
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        boxes.push([lo, hi]);
        if ids.len() <= LEAF_SIZE {
            nodes.push(Node::Leaf {
                start: offset as u32,
                end: (offset + ids.len()) as u32,
            });
            return slot;
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            points[a as usize][axis].total_cmp(&points[b as usize][axis])
        });
        nodes.push(Node::Leaf { start: 0, end: 0 });
        let (left_ids, right_ids) = ids.split_at_mut(mid);
        let left = Self::build_node(points, left_ids, offset, nodes, boxes);
        let right = Self::build_node(points, right_ids, offset + mid, nodes, boxes);
        nodes[slot as usize] = Node::Split { left, right };
        slot
    }

    /// Squared distance from `q` to the bounding box of `node`.
    #[inline]
    fn box_dist_sq(&self, node: u32, q: &[f64; 3]) -> f64 {
        let [lo, hi] = &self.boxes[node as usize];
        let mut d = 0.0;
        for k in 0..3 {
            let e = (lo[k] - q[k]).max(q[k] - hi[k]).max(0.0);
            d += e * e;
        }
        d
    }

    /// Children of a split, nearer box first, with their box distances.
    #[inline]
    fn order(&self, left: u32, right: u32, q: &[f64; 3]) -> [(u32, f64); 2] {
        let dl = self.box_dist_sq(left, q);
        let dr = self.box_dist_sq(right, q);
        if dl <= dr {
            [(left, dl), (right, dr)]
        } else {
            [(right, dr), (left, dl)]
        }
    }

    /// The `GRAPH_DEGREE` nearest points to `q` other than `skip`, padded with
    /// `skip` itself when the cloud is too small.
    fn k_nearest(&self, q: &[f64; 3], skip: usize) -> [u32; GRAPH_DEGREE] {
        let mut found: Vec<(f64, u32)> = Vec::with_capacity(GRAPH_DEGREE + 1);
        self.collect_k(0, q, skip as u32, &mut found);
        let mut out = [skip as u32; GRAPH_DEGREE];
        for (slot, &(_, i)) in out.iter_mut().zip(&found) {
            *slot = i;
        }
        out
    }

    fn collect_k(&self, node: u32, q: &[f64; 3], skip: u32, found: &mut Vec<(f64, u32)>) {
        let worst = |found: &Vec<(f64, u32)>| {
            if found.len() < GRAPH_DEGREE {
                f64::INFINITY
            } else {
                found[GRAPH_DEGREE - 1].0
            }
        };
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for t in start as usize..end as usize {
                    if self.ids[t] == skip {
                        continue;
                    }
                    let d = dist_sq(q, &self.pts[t]);
                    if d < worst(found) {
                        let at = found.partition_point(|&(e, _)| e <= d);
                        found.insert(at, (d, self.ids[t]));
                        found.truncate(GRAPH_DEGREE);
                    }
                }
            }
            Node::Split { left, right } => {
                for (child, d) in self.order(left, right, q) {
                    if d < worst(found) {
                        self.collect_k(child, q, skip, found);
                    }
                }
            }
        }
    }

    fn search(&self, node: u32, q: &[f64; 3], best: &mut Nearest, stop_sq: f64) -> bool {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for t in start as usize..end as usize {
                    best.offer(dist_sq(q, &self.pts[t]), self.ids[t] as usize);
                    if best.dist_sq <= stop_sq {
                        return true;
                    }
                }
                false
            }
            Node::Split { left, right } => {
                for (child, d) in self.order(left, right, q) {
                    // `<=` keeps equal-distance points reachable for tie-breaking
                    if d <= best.dist_sq && self.search(child, q, best, stop_sq) {
                        return true;
                    }
                }
                false
            }
        }
    }
}
