//! Declarative shape definitions (TOML).
//!
//! ```toml
//! type = "difference"
//! [a]
//! type = "box"
//! half_extents = [0.25, 0.25, 0.25]
//! [b]
//! type = "sphere"
//! radius = 0.3
//! ```
//!
//! Meshes are referenced by path (relative to the shape file) and may only
//! appear at the root of a definition.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::TaylorCoefficients;
use crate::mesh::read_mesh;
use crate::oracle::{CsgNode, MeshSdf, Oracle, Primitive, SignMethod};
use crate::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDef {
    Sphere {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
    Box {
        #[serde(default)]
        center: [f64; 3],
        half_extents: [f64; 3],
    },
    Torus {
        #[serde(default)]
        center: [f64; 3],
        major_radius: f64,
        minor_radius: f64,
    },
    Capsule {
        a: [f64; 3],
        b: [f64; 3],
        radius: f64,
    },
    Plane {
        normal: [f64; 3],
        #[serde(default)]
        offset: f64,
    },
    Polynomial {
        #[serde(default)]
        center: [f64; 3],
        #[serde(default = "default_scale")]
        scale: f64,
        order: u32,
        coefficients: Vec<f64>,
    },
    Union {
        a: Box<ShapeDef>,
        b: Box<ShapeDef>,
    },
    Intersection {
        a: Box<ShapeDef>,
        b: Box<ShapeDef>,
    },
    Difference {
        a: Box<ShapeDef>,
        b: Box<ShapeDef>,
    },
    Mesh {
        path: PathBuf,
        /// Rescale into the normalization cube on load.
        #[serde(default = "default_true")]
        normalize: bool,
        #[serde(default = "default_padding")]
        padding: f64,
        #[serde(default)]
        sign: SignMethod,
    },
}

fn default_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_padding() -> f64 {
    0.05
}

fn vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ShapeDef {
    /// Builds the oracle; relative mesh paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Oracle> {
        match self {
            ShapeDef::Mesh { path, normalize, padding, sign } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let mesh = read_mesh(&full)?;
                let sdf =
                    if *normalize { MeshSdf::normalized(&mesh, *padding, *sign)? } else { MeshSdf::new(mesh, *sign)? };
                Ok(sdf.into())
            }
            ShapeDef::Union { .. } | ShapeDef::Intersection { .. } | ShapeDef::Difference { .. } => {
                Ok(Oracle::Csg(self.build_csg()?))
            }
            _ => Ok(Oracle::Primitive(self.build_primitive()?)),
        }
    }

    fn build_csg(&self) -> Result<CsgNode> {
        Ok(match self {
            ShapeDef::Union { a, b } => CsgNode::union(a.build_csg()?, b.build_csg()?),
            ShapeDef::Intersection { a, b } => CsgNode::intersection(a.build_csg()?, b.build_csg()?),
            ShapeDef::Difference { a, b } => CsgNode::difference(a.build_csg()?, b.build_csg()?),
            ShapeDef::Mesh { .. } => return Err(Error::Config("meshes cannot be combined in CSG trees".into())),
            _ => CsgNode::Leaf(self.build_primitive()?),
        })
    }

    fn build_primitive(&self) -> Result<Primitive> {
        match self {
            ShapeDef::Sphere { center, radius } => Primitive::sphere(vec3(center), *radius),
            ShapeDef::Box { center, half_extents } => Primitive::cuboid(vec3(center), vec3(half_extents)),
            ShapeDef::Torus { center, major_radius, minor_radius } => {
                Primitive::torus(vec3(center), *major_radius, *minor_radius)
            }
            ShapeDef::Capsule { a, b, radius } => Primitive::capsule(vec3(a), vec3(b), *radius),
            ShapeDef::Plane { normal, offset } => Primitive::plane(vec3(normal), *offset),
            ShapeDef::Polynomial { center, scale, order, coefficients } => {
                Primitive::polynomial(vec3(center), *scale, TaylorCoefficients::new(*order, coefficients.clone())?)
            }
            _ => unreachable!("composite handled by caller"),
        }
    }
}

pub fn parse_shape(text: &str, base_dir: &Path) -> Result<Oracle> {
    let def: ShapeDef = toml::from_str(text).map_err(|e| Error::Config(format!("shape definition: {e}")))?;
    def.build(base_dir)
}

pub fn load_shape(path: impl AsRef<Path>) -> Result<Oracle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_shape(&text, path.parent().unwrap_or(Path::new(".")))
}
