//! Ground-truth signed distance sources: analytic primitives, CSG trees and
//! watertight meshes. Negative inside, positive outside.

mod csg;
mod mesh_sdf;
mod primitive;
mod shape_file;

use std::sync::Arc;

use crate::geom::Aabb;
use crate::Vec3;

pub use csg::CsgNode;
pub use mesh_sdf::{MeshSdf, SignMethod};
pub use primitive::Primitive;
pub use shape_file::{load_shape, parse_shape, ShapeDef};

const GRADIENT_STEP: f64 = 1e-6;

/// A signed distance field.
pub trait Sdf: Send + Sync {
    fn distance(&self, p: &Vec3) -> f64;

    /// Region containing the zero set, clipped to the normalization cube for
    /// unbounded shapes.
    fn bounds(&self) -> Aabb;

    /// Central-difference gradient.
    fn gradient(&self, p: &Vec3) -> Vec3 {
        let mut g = Vec3::zeros();
        for a in 0..3 {
            let mut hi = *p;
            let mut lo = *p;
            hi[a] += GRADIENT_STEP;
            lo[a] -= GRADIENT_STEP;
            g[a] = (self.distance(&hi) - self.distance(&lo)) / (2.0 * GRADIENT_STEP);
        }
        g
    }
}

/// Anything that answers inside/outside for arbitrary points.
pub trait SignSource: Sync {
    fn is_inside(&self, p: &Vec3) -> bool;
    fn bounding_box(&self) -> Aabb;
}

impl<T: Sdf + ?Sized> SignSource for T {
    fn is_inside(&self, p: &Vec3) -> bool {
        self.distance(p) < 0.0
    }

    fn bounding_box(&self) -> Aabb {
        self.bounds()
    }
}

/// Any supported oracle.
#[derive(Clone, Debug)]
pub enum Oracle {
    Primitive(Primitive),
    Csg(CsgNode),
    Mesh(Arc<MeshSdf>),
}

impl Sdf for Oracle {
    fn distance(&self, p: &Vec3) -> f64 {
        match self {
            Oracle::Primitive(s) => s.distance(p),
            Oracle::Csg(s) => s.distance(p),
            Oracle::Mesh(s) => s.distance(p),
        }
    }

    fn bounds(&self) -> Aabb {
        match self {
            Oracle::Primitive(s) => s.bounds(),
            Oracle::Csg(s) => s.bounds(),
            Oracle::Mesh(s) => Sdf::bounds(s.as_ref()),
        }
    }
}

impl From<Primitive> for Oracle {
    fn from(p: Primitive) -> Self {
        Oracle::Primitive(p)
    }
}

impl From<CsgNode> for Oracle {
    fn from(c: CsgNode) -> Self {
        Oracle::Csg(c)
    }
}

impl From<MeshSdf> for Oracle {
    fn from(m: MeshSdf) -> Self {
        Oracle::Mesh(Arc::new(m))
    }
}

/// Inside/outside flags at the `resolution^3` cell centers of the
/// normalization cube, x fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignGrid {
    pub resolution: usize,
    pub inside: Vec<bool>,
}

impl SignGrid {
    pub fn count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}

pub fn oracle_sign_grid(oracle: &(impl SignSource + ?Sized), resolution: usize) -> SignGrid {
    assert!(resolution >= 2, "sign grid resolution must be at least 2");
    let step = 1.0 / resolution as f64;
    let coord = |i: usize| -0.5 + (i as f64 + 0.5) * step;
    let mut inside = Vec::with_capacity(resolution.pow(3));
    for k in 0..resolution {
        for j in 0..resolution {
            for i in 0..resolution {
                inside.push(oracle.is_inside(&Vec3::new(coord(i), coord(j), coord(k))));
            }
        }
    }
    SignGrid { resolution, inside }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_grid_examples() {
        let small = Primitive::sphere(Vec3::zeros(), 0.3).unwrap();
        assert_eq!(oracle_sign_grid(&small, 2).count_inside(), 0);
        let big = Primitive::sphere(Vec3::zeros(), 0.8).unwrap();
        assert_eq!(oracle_sign_grid(&big, 2).count_inside(), 8);
        let plane = Primitive::plane(Vec3::new(1.0, 0.0, 0.0), 0.0).unwrap();
        for res in [2, 4, 10, 16] {
            let g = oracle_sign_grid(&plane, res);
            assert_eq!(g.count_inside() * 2, res.pow(3));
        }
    }
}
