//! Implicit shapes as sets of expansion points carrying low-order Taylor
//! polynomials of a signed distance field.
//!
//! A [`TaylorField`] answers `F(x)` by blending the local polynomials of the
//! `k` nearest expansion points with softmin weights. Fields are fitted
//! against ground-truth oracles ([`oracle`]) by local least squares
//! ([`fitting`]), and meshed with a coarse-to-fine sampler whose
//! expansion-point count does not depend on the output resolution
//! ([`extraction`]). [`metrics`] and [`bench`] measure reconstruction quality
//! and evaluation cost; [`cli`] wires everything into reproducible runs.

pub mod basis;
pub mod bench;
pub mod cli;
pub mod error;
pub mod extraction;
pub mod field;
pub mod field_file;
pub mod fitting;
pub mod geom;
pub mod knn;
pub mod mesh;
pub mod metrics;
pub mod oracle;
pub mod seed;
pub mod sigmoid;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use basis::{basis_size, monomial_vector, MonomialBasis};
pub use error::{Error, Result};
pub use field::{eval_local, softmin_weights, ExpansionPoint, FieldParams, TaylorCoefficients, TaylorField};
pub use geom::Aabb;
pub use mesh::Mesh;
pub use oracle::{CsgNode, MeshSdf, Oracle, Primitive, Sdf, SignSource};
