//! Triangle meshes: topology checks, surface sampling and simple generators.

mod bvh;
mod io;

use std::collections::HashMap;

use rand::Rng;

use crate::geom::Aabb;
use crate::Vec3;

pub use bvh::{ClosestPoint, Feature, TriangleBvh};
pub use io::{read_mesh, read_obj, read_ply, read_stl, write_mesh, write_obj, write_ply, write_stl};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

/// Edge-level topology summary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Undirected edges used by exactly one triangle.
    pub boundary_edges: usize,
    /// Undirected edges used by more than two triangles.
    pub non_manifold_edges: usize,
    /// Directed edges that occur more than once (inconsistent winding).
    pub misoriented_edges: usize,
}

impl Topology {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges == 0 && self.non_manifold_edges == 0
    }

    pub fn is_consistently_oriented(&self) -> bool {
        self.misoriented_edges == 0
    }
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        Self { vertices, triangles }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Vertex count used by the topology counts: only referenced vertices.
    pub fn topology(&self) -> Topology {
        let mut undirected: HashMap<(u32, u32), u32> = HashMap::new();
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                used[a as usize] = true;
                *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        Topology {
            vertices: used.iter().filter(|&&u| u).count(),
            edges: undirected.len(),
            faces: self.triangles.len(),
            boundary_edges: undirected.values().filter(|&&c| c == 1).count(),
            non_manifold_edges: undirected.values().filter(|&&c| c > 2).count(),
            misoriented_edges: directed.values().filter(|&&c| c > 1).count(),
        }
    }

    pub fn translated(&self, offset: &Vec3) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v + offset).collect(), triangles: self.triangles.clone() }
    }

    /// Uniformly rescales and recenters so the bounding box is centered at
    /// the origin with its longest side equal to `1 - 2 * padding`.
    pub fn normalized(&self, padding: f64) -> Self {
        let b = self.bounds();
        if b.is_empty() {
            return self.clone();
        }
        let center = b.center();
        let longest = b.extent().max();
        let scale = if longest > 0.0 { (1.0 - 2.0 * padding) / longest } else { 1.0 };
        Self {
            vertices: self.vertices.iter().map(|v| (v - center) * scale).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Merges vertices with bit-identical positions (triangle soups from STL).
    pub fn welded(&self) -> Self {
        let mut map: HashMap<[u64; 3], u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
            let id = *map.entry(key).or_insert_with(|| {
                vertices.push(*v);
                (vertices.len() - 1) as u32
            });
            remap.push(id);
        }
        let triangles = self.triangles.iter().map(|t| t.map(|i| remap[i as usize])).collect();
        Self { vertices, triangles }
    }

    /// Area-weighted uniform samples on the surface. Returns an empty list
    /// for meshes with zero area.
    pub fn sample_surface<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Vec3> {
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for t in 0..self.triangles.len() {
            total += self.triangle_area(t);
            cumulative.push(total);
        }
        if total.is_nan() || total <= 0.0 {
            return Vec::new();
        }
        (0..n)
            .map(|_| {
                let r = rng.gen::<f64>() * total;
                let t = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
                let [a, b, c] = self.triangle(t);
                let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
                if u + v > 1.0 {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                a + (b - a) * u + (c - a) * v
            })
            .collect()
    }

    /// Subdivided icosahedron projected onto a sphere, outward oriented.
    pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|v| Vec3::new(v[0], v[1], v[2]).normalize())
        .collect();
        let mut triangles: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
                *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                })
            };
            for [a, b, c] in triangles {
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }
        let vertices = vertices.into_iter().map(|v| center + v * radius).collect();
        Self { vertices, triangles }
    }

    /// Axis-aligned box with outward-facing triangles.
    pub fn cuboid(center: Vec3, half: Vec3) -> Self {
        let vertices = (0..8)
            .map(|i| {
                let s = Vec3::new(
                    if i & 1 == 0 { -1.0 } else { 1.0 },
                    if i & 2 == 0 { -1.0 } else { 1.0 },
                    if i & 4 == 0 { -1.0 } else { 1.0 },
                );
                center + half.component_mul(&s)
            })
            .collect();
        let triangles = vec![
            [0, 2, 3],
            [0, 3, 1],
            [4, 5, 7],
            [4, 7, 6],
            [0, 1, 5],
            [0, 5, 4],
            [2, 6, 7],
            [2, 7, 3],
            [0, 4, 6],
            [0, 6, 2],
            [1, 3, 7],
            [1, 7, 5],
        ];
        Self { vertices, triangles }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn icosphere_is_closed_sphere() {
        for level in 0..4 {
            let m = Mesh::icosphere(Vec3::zeros(), 0.3, level);
            let t = m.topology();
            assert!(t.is_closed() && t.is_consistently_oriented());
            assert_eq!(t.euler_characteristic(), 2);
            assert_eq!(m.triangles.len(), 20 * 4usize.pow(level));
        }
        // Outward orientation: positive signed volume.
        let m = Mesh::icosphere(Vec3::zeros(), 1.0, 2);
        let vol: f64 = (0..m.triangles.len())
            .map(|t| {
                let [a, b, c] = m.triangle(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum();
        assert!(vol > 0.0);
    }

    #[test]
    fn cuboid_is_outward_and_closed() {
        let m = Mesh::cuboid(Vec3::zeros(), Vec3::new(0.1, 0.2, 0.3));
        let t = m.topology();
        assert!(t.is_closed() && t.is_consistently_oriented());
        let vol: f64 = (0..m.triangles.len())
            .map(|t| {
                let [a, b, c] = m.triangle(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum();
        assert!((vol - 0.2 * 0.4 * 0.6).abs() < 1e-12);
    }

    #[test]
    fn open_mesh_detected() {
        let mut m = Mesh::icosphere(Vec3::zeros(), 0.3, 1);
        m.triangles.pop();
        let t = m.topology();
        assert_eq!(t.boundary_edges, 3);
        assert!(!t.is_closed());
    }

    #[test]
    fn surface_samples_lie_on_sphere() {
        let m = Mesh::icosphere(Vec3::zeros(), 0.3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = m.sample_surface(2000, &mut rng);
        assert_eq!(s.len(), 2000);
        assert!(s.iter().all(|p| p.norm() <= 0.3 + 1e-12 && p.norm() > 0.29));
        let mean = s.iter().fold(Vec3::zeros(), |a, p| a + p) / 2000.0;
        assert!(mean.norm() < 0.02);
    }

    #[test]
    fn welding_merges_duplicates() {
        let m = Mesh::icosphere(Vec3::zeros(), 0.3, 1);
        let mut soup = Mesh::default();
        for t in 0..m.triangles.len() {
            let base = soup.vertices.len() as u32;
            soup.vertices.extend(m.triangle(t));
            soup.triangles.push([base, base + 1, base + 2]);
        }
        let w = soup.welded();
        assert_eq!(w.vertices.len(), m.vertices.len());
        assert!(w.topology().is_closed());
    }
}
