//! Ground-truth shapes: primitives, CSG trees, TOML shape files and meshes.
//!
//! cargo run --example oracles

use std::path::Path;

use taylor_implicit::oracle::parse_shape;
use taylor_implicit::{CsgNode, Mesh, MeshSdf, Primitive, Sdf, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let sphere = Primitive::sphere(Vec3::zeros(), 0.3)?;
    let cube = Primitive::cuboid(Vec3::zeros(), Vec3::repeat(0.25))?;
    let carved = CsgNode::difference(cube.clone(), sphere.clone());

    let probes = [Vec3::zeros(), Vec3::new(0.3, 0.0, 0.0), Vec3::repeat(0.24)];
    println!("{:>22} {:>10} {:>10} {:>10}", "point", "sphere", "box", "box-sphere");
    for p in &probes {
        println!(
            "{:>22} {:>10.4} {:>10.4} {:>10.4}",
            format!("({:.2}, {:.2}, {:.2})", p.x, p.y, p.z),
            sphere.distance(p),
            cube.distance(p),
            carved.distance(p)
        );
    }

    let torus = parse_shape("type = \"torus\"\nmajor_radius = 0.25\nminor_radius = 0.1\n", Path::new("."))?;
    println!("torus at its core circle: {:.4}", torus.distance(&Vec3::new(0.25, 0.0, 0.0)));

    // A mesh oracle: the same sphere as a triangulated surface.
    let mesh = MeshSdf::new(Mesh::icosphere(Vec3::zeros(), 0.3, 4), Default::default())?;
    println!("icosphere at origin: {:.4} (analytic -0.3)", mesh.distance(&Vec3::zeros()));
    Ok(())
}
