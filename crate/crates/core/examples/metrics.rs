//! IoU, Chamfer-L1 and F-score of an extracted sphere against the analytic
//! shape.
//!
//! cargo run --release --example metrics

use taylor_implicit::extraction::{extract, ExtractionConfig};
use taylor_implicit::fitting::FitConfig;
use taylor_implicit::metrics::{evaluate, reference_mesh, MetricsConfig};
use taylor_implicit::{Oracle, Primitive, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let sphere: Oracle = Primitive::sphere(Vec3::zeros(), 0.3)?.into();
    let cfg = MetricsConfig::default();
    let gt = reference_mesh(&sphere, cfg.reference_res)?;
    for res in [32, 64, 128] {
        let e = extract(&sphere, &FitConfig::default(), &ExtractionConfig::default().with_mesh_res(res))?;
        let r = evaluate(&e.mesh, Some(&e.grid), &sphere, &gt, &cfg, 42)?;
        println!(
            "mesh_res {res:>3}: IoU {:.4}  Chamfer-L1 x10 {:.5}  F@{} {:.4}",
            r.iou, r.chamfer_l1_x10, r.tau, r.f_score
        );
    }
    Ok(())
}
