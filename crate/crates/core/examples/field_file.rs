//! Stores a fitted field in the TYLF format and meshes it from disk.
//!
//! cargo run --release --example field_file

use taylor_implicit::extraction::{extract_from_field, ExtractionConfig};
use taylor_implicit::field_file::{read_field, write_field};
use taylor_implicit::fitting::{fit_field, FitConfig, SamplingConfig};
use taylor_implicit::{Primitive, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let shape = Primitive::capsule(Vec3::new(-0.2, 0.0, 0.0), Vec3::new(0.2, 0.0, 0.0), 0.12)?;
    let cfg = ExtractionConfig::default().with_mesh_res(64);
    let sampling = SamplingConfig { n_total: 6000, uniform_fraction: 0.1, rng_seed: 3, ..Default::default() };
    let field = fit_field(&shape, &sampling, &FitConfig::default(), cfg.theta(), cfg.k)?;

    let dir = std::env::temp_dir().join("taylor-field-example");
    std::fs::create_dir_all(&dir).map_err(|e| taylor_implicit::Error::Config(e.to_string()))?;
    let path = dir.join("capsule.tylf");
    write_field(&field, &path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("{} points, order {}, {} bytes -> {}", field.len(), field.order(), bytes, path.display());

    let loaded = read_field(&path)?;
    let p = Vec3::new(0.0, 0.12, 0.0);
    println!("F at the capsule side: stored {:+.2e}, loaded {:+.2e}", field.eval(&p)?, loaded.eval(&p)?);

    let e = extract_from_field(loaded, &cfg)?;
    let topo = e.mesh.topology();
    println!("mesh from file: {} triangles, closed {}", e.mesh.triangles.len(), topo.is_closed());
    Ok(())
}
