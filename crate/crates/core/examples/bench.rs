//! Point-evaluation cost at 64 and 128 vertices per axis: Taylor path
//! against a dense baseline that queries a fixed-cost kernel per vertex.
//!
//! cargo run --release --example bench -- [flops_per_query]

use taylor_implicit::bench::{bench_evaluation, BenchConfig, DenseSurrogate};
use taylor_implicit::extraction::ExtractionConfig;
use taylor_implicit::fitting::FitConfig;
use taylor_implicit::{Primitive, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let flops = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8000);
    let bench = BenchConfig { surrogate: DenseSurrogate::new(flops), ..Default::default() };
    let shape = Primitive::sphere(Vec3::zeros(), 0.3)?;
    let report = bench_evaluation(&shape, &FitConfig::default(), &ExtractionConfig::default(), &bench)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>8}", "res", "decode", "grid", "taylor", "dense", "points");
    for r in &report.rows {
        println!(
            "{:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8}",
            r.mesh_res,
            r.decode_seconds,
            r.eval_seconds,
            r.taylor_path_seconds,
            r.baseline_eval_seconds,
            r.n_expansion_points
        );
    }
    println!(
        "ratio 128/64: taylor {:.2}, dense {:.2}",
        report.ratio(|r| r.taylor_path_seconds),
        report.ratio(|r| r.baseline_eval_seconds)
    );
    Ok(())
}
