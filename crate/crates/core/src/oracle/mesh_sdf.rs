use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Aabb;
use crate::mesh::{Feature, Mesh, TriangleBvh};
use crate::oracle::Sdf;
use crate::Vec3;

/// How the sign of a mesh distance is decided.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMethod {
    /// Hierarchical generalized winding number, inside where it exceeds 1/2.
    #[default]
    WindingNumber,
    /// Angle-weighted pseudo-normal at the closest feature.
    PseudoNormal,
}

/// Signed distance to a closed, consistently oriented triangle mesh.
#[derive(Clone, Debug)]
pub struct MeshSdf {
    mesh: Mesh,
    bvh: TriangleBvh,
    sign: SignMethod,
    face_normals: Vec<Vec3>,
    vertex_normals: Vec<Vec3>,
    /// Per triangle, per edge `i` (corner i to i+1): sum of the two adjacent
    /// face normals.
    edge_normals: Vec<[Vec3; 3]>,
}

impl MeshSdf {
    /// Validates that `mesh` is closed and consistently oriented.
    pub fn new(mesh: Mesh, sign: SignMethod) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::MeshIntegrity("mesh has no triangles".into()));
        }
        if let Some(t) = mesh.triangles.iter().find(|t| t.iter().any(|&i| i as usize >= mesh.vertices.len())) {
            return Err(Error::MeshIntegrity(format!("triangle {t:?} references a missing vertex")));
        }
        let topo = mesh.topology();
        if !topo.is_closed() {
            return Err(Error::MeshIntegrity(format!(
                "mesh is not watertight: {} boundary and {} non-manifold edges",
                topo.boundary_edges, topo.non_manifold_edges
            )));
        }
        if !topo.is_consistently_oriented() {
            return Err(Error::MeshIntegrity(format!(
                "{} edges are traversed twice in the same direction",
                topo.misoriented_edges
            )));
        }

        let face_normals: Vec<Vec3> = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.triangle(t);
                (b - a).cross(&(c - a)).try_normalize(0.0).unwrap_or_default()
            })
            .collect();
        let mut vertex_normals = vec![Vec3::zeros(); mesh.vertices.len()];
        let mut by_edge = std::collections::HashMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let corners = mesh.triangle(t);
            for i in 0..3 {
                let p = corners[i];
                let e1 = corners[(i + 1) % 3] - p;
                let e2 = corners[(i + 2) % 3] - p;
                let angle = match (e1.try_normalize(0.0), e2.try_normalize(0.0)) {
                    (Some(a), Some(b)) => a.dot(&b).clamp(-1.0, 1.0).acos(),
                    _ => 0.0,
                };
                vertex_normals[tri[i] as usize] += face_normals[t] * angle;
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_insert_with(Vec::new).push(t);
            }
        }
        let edge_normals = mesh
            .triangles
            .iter()
            .map(|tri| {
                let mut out = [Vec3::zeros(); 3];
                for (i, slot) in out.iter_mut().enumerate() {
                    let (a, b) = (tri[i], tri[(i + 1) % 3]);
                    for &t in &by_edge[&(a.min(b), a.max(b))] {
                        *slot += face_normals[t];
                    }
                }
                out
            })
            .collect();

        Ok(Self { bvh: TriangleBvh::new(&mesh), mesh, sign, face_normals, vertex_normals, edge_normals })
    }

    /// Rescales into the normalization cube, then validates.
    pub fn normalized(mesh: &Mesh, padding: f64, sign: SignMethod) -> Result<Self> {
        Self::new(mesh.normalized(padding), sign)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn bvh(&self) -> &TriangleBvh {
        &self.bvh
    }

    pub fn sign_method(&self) -> SignMethod {
        self.sign
    }

    pub fn with_sign_method(mut self, sign: SignMethod) -> Self {
        self.sign = sign;
        self
    }

    pub fn winding_number(&self, p: &Vec3) -> f64 {
        self.bvh.winding_number(p)
    }

    fn pseudo_normal(&self, triangle: u32, feature: Feature) -> Vec3 {
        let t = triangle as usize;
        match feature {
            Feature::Face => self.face_normals[t],
            Feature::Edge(i) => self.edge_normals[t][i as usize],
            Feature::Vertex(i) => self.vertex_normals[self.mesh.triangles[t][i as usize] as usize],
        }
    }
}

impl Sdf for MeshSdf {
    fn distance(&self, p: &Vec3) -> f64 {
        let c = self.bvh.closest_point(p).expect("validated non-empty mesh");
        let d = c.dist_sq.sqrt();
        let inside = match self.sign {
            SignMethod::WindingNumber => self.bvh.winding_number(p) > 0.5,
            SignMethod::PseudoNormal => (p - c.point).dot(&self.pseudo_normal(c.triangle, c.feature)) < 0.0,
        };
        if inside {
            -d
        } else {
            d
        }
    }

    fn bounds(&self) -> Aabb {
        self.mesh.bounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Primitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_open_and_misoriented_meshes() {
        let mut open = Mesh::icosphere(Vec3::zeros(), 0.3, 1);
        open.triangles.pop();
        assert!(matches!(MeshSdf::new(open, SignMethod::WindingNumber), Err(Error::MeshIntegrity(_))));
        let mut flipped = Mesh::icosphere(Vec3::zeros(), 0.3, 1);
        flipped.triangles[0].swap(0, 1);
        assert!(matches!(MeshSdf::new(flipped, SignMethod::WindingNumber), Err(Error::MeshIntegrity(_))));
        assert!(MeshSdf::new(Mesh::default(), SignMethod::WindingNumber).is_err());
    }

    #[test]
    fn sign_methods_agree_on_cube() {
        let cube = Mesh::cuboid(Vec3::zeros(), Vec3::repeat(0.25));
        let wn = MeshSdf::new(cube.clone(), SignMethod::WindingNumber).unwrap();
        let pn = MeshSdf::new(cube, SignMethod::PseudoNormal).unwrap();
        let exact = Primitive::cuboid(Vec3::zeros(), Vec3::repeat(0.25)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let p = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let e = exact.distance(&p);
            assert!((wn.distance(&p) - e).abs() < 1e-12, "winding at {p:?}");
            assert!((pn.distance(&p) - e).abs() < 1e-12, "pseudo-normal at {p:?}");
        }
    }

    #[test]
    fn icosphere_converges_to_sphere() {
        let sphere = Primitive::sphere(Vec3::zeros(), 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let probes: Vec<Vec3> = (0..1000)
            .map(|_| Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let mut last = f64::INFINITY;
        for level in 1..=4 {
            let m = MeshSdf::new(Mesh::icosphere(Vec3::zeros(), 0.3, level), SignMethod::WindingNumber).unwrap();
            let err = probes.iter().map(|p| (m.distance(p) - sphere.distance(p)).abs()).fold(0.0, f64::max);
            assert!(err < last, "level {level}: {err} !< {last}");
            last = err;
        }
        assert!(last < 2e-3);
    }
}
