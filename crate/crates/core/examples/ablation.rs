//! Order and neighbor-count sweeps on one fitted field.
//!
//! cargo run --release --example ablation

use taylor_implicit::cli::{ablate, AblationAxis};
use taylor_implicit::extraction::ExtractionConfig;
use taylor_implicit::fitting::FitConfig;
use taylor_implicit::metrics::{reference_mesh, MetricsConfig};
use taylor_implicit::{Oracle, Primitive, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let torus: Oracle = Primitive::torus(Vec3::zeros(), 0.25, 0.1)?.into();
    let metrics = MetricsConfig { n_points: 20_000, ..Default::default() };
    let gt = reference_mesh(&torus, metrics.reference_res)?;
    let extraction = ExtractionConfig::default().with_mesh_res(64);
    let fit = FitConfig::default();

    for (axis, values) in [(AblationAxis::Order, vec![0, 1, 2, 3]), (AblationAxis::K, vec![1, 2, 4, 8])] {
        println!("{axis:?}");
        for row in ablate(&torus, &gt, &fit, &extraction, &metrics, axis, &values, 0)? {
            println!(
                "  {:>2}: IoU {:.4}  Chamfer x10 {:.5}  F {:.4}",
                row.value, row.iou, row.chamfer_l1_x10, row.f_score
            );
        }
    }
    Ok(())
}
