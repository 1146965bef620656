//! Bounding-volume hierarchy over triangles: closest-point queries and a
//! hierarchical generalized winding number (far clusters are replaced by
//! their area-weighted normal dipole).

use std::f64::consts::PI;

use crate::geom::Aabb;
use crate::mesh::Mesh;
use crate::Vec3;

const LEAF_SIZE: usize = 4;
/// Clusters farther than `BETA * radius` use the dipole approximation.
const BETA: f64 = 2.0;

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    /// Child node indices, or a triangle range when `leaf`.
    a: u32,
    b: u32,
    leaf: bool,
    /// Sum of area-weighted normals `0.5 * (b - a) x (c - a)`.
    area_normal: Vec3,
    /// Area-weighted centroid.
    centroid: Vec3,
    radius: f64,
}

/// Which part of a triangle the closest point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feature {
    Face,
    /// Edge `i` runs from corner `i` to corner `(i + 1) % 3`.
    Edge(u8),
    Vertex(u8),
}

#[derive(Clone, Copy, Debug)]
pub struct ClosestPoint {
    pub point: Vec3,
    pub dist_sq: f64,
    pub triangle: u32,
    pub feature: Feature,
}

#[derive(Clone, Debug)]
pub struct TriangleBvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

impl TriangleBvh {
    pub fn new(mesh: &Mesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.triangles.len()).map(|t| mesh.triangle(t)).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|[a, b, c]| (a + b + c) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&tris, &centroids, &mut order, 0, &mut nodes);
        }
        Self { nodes, order, tris }
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    pub fn closest_point(&self, p: &Vec3) -> Option<ClosestPoint> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best =
            ClosestPoint { point: Vec3::zeros(), dist_sq: f64::INFINITY, triangle: 0, feature: Feature::Face };
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.bounds.dist_sq(p) >= best.dist_sq {
                continue;
            }
            if node.leaf {
                for slot in node.a..node.b {
                    let t = self.order[slot as usize];
                    let (q, feature) = closest_on_triangle(p, &self.tris[t as usize]);
                    let d = (q - p).norm_squared();
                    if d < best.dist_sq || (d == best.dist_sq && t < best.triangle) {
                        best = ClosestPoint { point: q, dist_sq: d, triangle: t, feature };
                    }
                }
            } else {
                let (l, r) = (node.a, node.b);
                let dl = self.nodes[l as usize].bounds.dist_sq(p);
                let dr = self.nodes[r as usize].bounds.dist_sq(p);
                // Visit the nearer child first.
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        Some(best)
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        self.closest_point(p).map_or(f64::INFINITY, |c| c.dist_sq.sqrt())
    }

    /// Generalized winding number: ~1 inside a closed outward-oriented
    /// surface, ~0 outside.
    pub fn winding_number(&self, p: &Vec3) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let r = node.centroid - p;
            let dist = r.norm();
            if !node.leaf && dist > BETA * node.radius {
                total += r.dot(&node.area_normal) / (4.0 * PI * dist * dist * dist);
                continue;
            }
            if node.leaf {
                for slot in node.a..node.b {
                    let t = self.order[slot as usize];
                    total += solid_angle(p, &self.tris[t as usize]) / (4.0 * PI);
                }
            } else {
                stack.push(node.a);
                stack.push(node.b);
            }
        }
        total
    }

    /// Exact winding number summed over every triangle (reference path).
    pub fn winding_number_exact(&self, p: &Vec3) -> f64 {
        self.tris.iter().map(|t| solid_angle(p, t)).sum::<f64>() / (4.0 * PI)
    }

    pub fn triangle(&self, t: u32) -> &[Vec3; 3] {
        &self.tris[t as usize]
    }
}

fn build(tris: &[[Vec3; 3]], centroids: &[Vec3], order: &mut [u32], offset: u32, nodes: &mut Vec<Node>) -> u32 {
    let mut bounds = Aabb::empty();
    let mut area_normal = Vec3::zeros();
    let mut weighted = Vec3::zeros();
    let mut area = 0.0;
    for &t in order.iter() {
        let [a, b, c] = &tris[t as usize];
        bounds = bounds.grow(a).grow(b).grow(c);
        let n = 0.5 * (b - a).cross(&(c - a));
        let ar = n.norm();
        area_normal += n;
        weighted += centroids[t as usize] * ar;
        area += ar;
    }
    let centroid = if area > 0.0 { weighted / area } else { bounds.center() };
    let radius = (0..8)
        .map(|i| {
            let corner = Vec3::new(
                if i & 1 == 0 { bounds.min.x } else { bounds.max.x },
                if i & 2 == 0 { bounds.min.y } else { bounds.max.y },
                if i & 4 == 0 { bounds.min.z } else { bounds.max.z },
            );
            (corner - centroid).norm()
        })
        .fold(0.0, f64::max);
    let id = nodes.len() as u32;
    nodes.push(Node { bounds, a: offset, b: offset + order.len() as u32, leaf: true, area_normal, centroid, radius });
    if order.len() <= LEAF_SIZE {
        return id;
    }
    let cb = Aabb::from_points(order.iter().map(|&t| &centroids[t as usize]));
    let extent = cb.extent();
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis].total_cmp(&centroids[b as usize][axis]).then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build(tris, centroids, lo, offset, nodes);
    let right = build(tris, centroids, hi, offset + mid as u32, nodes);
    let node = &mut nodes[id as usize];
    node.leaf = false;
    node.a = left;
    node.b = right;
    id
}

/// Signed solid angle subtended by a triangle (Van Oosterom and Strackee).
fn solid_angle(p: &Vec3, [a, b, c]: &[Vec3; 3]) -> f64 {
    let (a, b, c) = (a - p, b - p, c - p);
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(&c));
    let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
    if num == 0.0 && den <= 0.0 {
        return 0.0;
    }
    2.0 * num.atan2(den)
}

/// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
pub(crate) fn closest_on_triangle(p: &Vec3, [a, b, c]: &[Vec3; 3]) -> (Vec3, Feature) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, Feature::Vertex(0));
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, Feature::Vertex(1));
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, Feature::Edge(0));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, Feature::Vertex(2));
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, Feature::Edge(2));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, Feature::Edge(1));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, Feature::Face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_distance(mesh: &Mesh, p: &Vec3) -> f64 {
        (0..mesh.triangles.len())
            .map(|t| (closest_on_triangle(p, &mesh.triangle(t)).0 - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn closest_point_matches_brute_force() {
        let mesh = Mesh::icosphere(Vec3::new(0.05, 0.0, -0.02), 0.3, 3);
        let bvh = TriangleBvh::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let p = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            assert!((bvh.distance(&p) - brute_distance(&mesh, &p)).abs() < 1e-14);
        }
    }

    #[test]
    fn winding_number_inside_outside() {
        let mesh = Mesh::icosphere(Vec3::zeros(), 0.3, 3);
        let bvh = TriangleBvh::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let p = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let exact = bvh.winding_number_exact(&p);
            let fast = bvh.winding_number(&p);
            let r = p.norm();
            if r < 0.28 {
                assert!((exact - 1.0).abs() < 1e-9);
            } else if r > 0.31 {
                assert!(exact.abs() < 1e-9);
            }
            assert!((exact - fast).abs() < 0.05, "{exact} vs {fast} at r={r}");
        }
    }

    #[test]
    fn closest_features() {
        let tri = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert_eq!(closest_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &tri).1, Feature::Vertex(0));
        assert_eq!(closest_on_triangle(&Vec3::new(0.5, -1.0, 0.0), &tri).1, Feature::Edge(0));
        assert_eq!(closest_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &tri).1, Feature::Edge(1));
        assert_eq!(closest_on_triangle(&Vec3::new(-1.0, 0.5, 0.0), &tri).1, Feature::Edge(2));
        let (q, f) = closest_on_triangle(&Vec3::new(0.2, 0.2, 1.0), &tri);
        assert_eq!(f, Feature::Face);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
    }
}
