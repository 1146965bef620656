//! Fits sampled expansion points on three shapes at orders 0..=3 and
//! reports the field's error against the oracle.
//!
//! cargo run --release --example fit_orders

use taylor_implicit::fitting::{default_theta, field_fit_error, fit_field_with_summary, FitConfig, SamplingConfig};
use taylor_implicit::{Primitive, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let shapes = [
        ("sphere", Primitive::sphere(Vec3::zeros(), 0.3)?),
        ("box", Primitive::cuboid(Vec3::zeros(), Vec3::repeat(0.25))?),
        ("torus", Primitive::torus(Vec3::zeros(), 0.25, 0.1)?),
    ];
    let sampling = SamplingConfig { n_total: 1000, rng_seed: 1, ..Default::default() };
    let theta = default_theta(0.1);
    println!("{:>7} {:>5} {:>12} {:>12} {:>12}", "shape", "order", "mean |err|", "max |err|", "fit rms p90");
    for (name, shape) in &shapes {
        for order in 0..=3 {
            let fit = FitConfig::default().with_order(order);
            let (field, summary) = fit_field_with_summary(shape, &sampling, &fit, theta, 4)?;
            let err = field_fit_error(shape, &field, 10_000, 7)?;
            println!(
                "{name:>7} {order:>5} {:>12.3e} {:>12.3e} {:>12.3e}",
                err.raw.mean_abs, err.raw.max_abs, summary.residual_rms_p90
            );
        }
    }
    Ok(())
}
