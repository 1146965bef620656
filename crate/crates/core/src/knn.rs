//! Static kd-tree over expansion-point positions.
//!
//! Neighbors are ordered by `(squared distance, point index)`, so results are
//! deterministic even when several points are equidistant from the query.

use crate::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Copy, Debug)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { axis: u8, value: f64, left: u32, right: u32 },
}

#[derive(Clone, Debug)]
pub struct KdTree {
    nodes: Vec<Node>,
    /// Point indices, permuted so each leaf owns a contiguous range.
    order: Vec<u32>,
    /// Positions in `order` layout.
    coords: Vec<[f64; 3]>,
}

/// One result of a nearest-neighbor query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: u32,
    pub dist_sq: f64,
}

impl Neighbor {
    #[inline]
    fn precedes(&self, other: &Neighbor) -> bool {
        self.dist_sq < other.dist_sq || (self.dist_sq == other.dist_sq && self.index < other.index)
    }
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            build(points, &mut order, 0, &mut nodes);
        }
        let coords = order
            .iter()
            .map(|&i| {
                let p = &points[i as usize];
                [p.x, p.y, p.z]
            })
            .collect();
        Self { nodes, order, coords }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The `min(k, len)` nearest points to `query`, nearest first.
    pub fn knn(&self, query: &Vec3, k: usize) -> Vec<Neighbor> {
        let mut out = Vec::with_capacity(k);
        self.knn_into(query, k, &mut out);
        out
    }

    /// Like [`KdTree::knn`] but reuses the caller's buffer.
    pub fn knn_into(&self, query: &Vec3, k: usize, out: &mut Vec<Neighbor>) {
        out.clear();
        if self.nodes.is_empty() || k == 0 {
            return;
        }
        let q = [query.x, query.y, query.z];
        self.search(0, &q, k, out);
    }

    /// Indices of all points within distance `r` of `query` (inclusive),
    /// in tree order.
    pub fn within_radius(&self, query: &Vec3, r: f64) -> Vec<u32> {
        let mut slots = Vec::new();
        self.slots_within(query, r, &mut slots);
        slots.into_iter().map(|s| self.order[s as usize]).collect()
    }

    /// Like [`KdTree::within_radius`] but yields storage slots; see
    /// [`KdTree::slot`].
    pub(crate) fn slots_within(&self, query: &Vec3, r: f64, out: &mut Vec<u32>) {
        out.clear();
        if self.nodes.is_empty() {
            return;
        }
        let q = [query.x, query.y, query.z];
        self.collect(0, &q, r * r, out);
    }

    /// Coordinates and point index stored in `slot`.
    #[inline]
    pub(crate) fn slot(&self, slot: u32) -> (&[f64; 3], u32) {
        (&self.coords[slot as usize], self.order[slot as usize])
    }

    fn collect(&self, node: u32, q: &[f64; 3], r_sq: f64, out: &mut Vec<u32>) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    if dist_sq(q, &self.coords[slot as usize]) <= r_sq {
                        out.push(slot);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.collect(near, q, r_sq, out);
                if diff * diff <= r_sq {
                    self.collect(far, q, r_sq, out);
                }
            }
        }
    }

    fn search(&self, node: u32, q: &[f64; 3], k: usize, best: &mut Vec<Neighbor>) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let cand =
                        Neighbor { index: self.order[slot as usize], dist_sq: dist_sq(q, &self.coords[slot as usize]) };
                    insert(best, k, cand);
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, best);
                // `<=` keeps equidistant points with smaller indices reachable.
                if best.len() < k || diff * diff <= best[best.len() - 1].dist_sq {
                    self.search(far, q, k, best);
                }
            }
        }
    }
}

#[inline]
pub(crate) fn dist_sq(q: &[f64; 3], p: &[f64; 3]) -> f64 {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    let dz = q[2] - p[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub(crate) fn insert(best: &mut Vec<Neighbor>, k: usize, cand: Neighbor) {
    if best.len() == k {
        if !cand.precedes(&best[k - 1]) {
            return;
        }
        best.pop();
    }
    let mut pos = best.len();
    while pos > 0 && cand.precedes(&best[pos - 1]) {
        pos -= 1;
    }
    best.insert(pos, cand);
}

fn build(points: &[Vec3], order: &mut [u32], offset: u32, nodes: &mut Vec<Node>) -> u32 {
    let id = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf { start: offset, end: offset + order.len() as u32 });
        return id;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        let p = &points[i as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis].total_cmp(&points[b as usize][axis]).then(a.cmp(&b))
    });
    let value = points[order[mid] as usize][axis];
    // Placeholder, patched once both children exist.
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (left_part, right_part) = order.split_at_mut(mid);
    let left = build(points, left_part, offset, nodes);
    let right = build(points, right_part, offset + mid as u32, nodes);
    nodes[id as usize] = Node::Split { axis: axis as u8, value, left, right };
    id
}
