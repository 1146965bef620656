//! Coarse-to-fine extraction of a torus, written as OBJ.
//!
//! cargo run --release --example extract_mesh -- [out.obj]

use taylor_implicit::extraction::{extract, ExtractionConfig};
use taylor_implicit::fitting::FitConfig;
use taylor_implicit::mesh::write_mesh;
use taylor_implicit::{Primitive, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "torus.obj".into());
    let torus = Primitive::torus(Vec3::zeros(), 0.25, 0.1)?;
    let cfg = ExtractionConfig::default();
    let e = extract(&torus, &FitConfig::default(), &cfg)?;

    let topo = e.mesh.topology();
    println!("expansion points   {}", e.n_expansion_points());
    println!("taylor queries     {} of {}", e.stats.n_taylor_queries, cfg.mesh_res.pow(3));
    println!("triangles          {}", e.mesh.triangles.len());
    println!("closed             {} (euler {})", topo.is_closed(), topo.euler_characteristic());
    println!(
        "stages (s)         classify {:.3}  refine {:.3}  eval {:.3}  mc {:.3}",
        e.times.classify_seconds, e.times.refine_seconds, e.times.eval_seconds, e.times.marching_cubes_seconds
    );
    write_mesh(&e.mesh, &out)?;
    println!("wrote {out}");
    Ok(())
}
