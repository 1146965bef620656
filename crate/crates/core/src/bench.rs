//! Point-evaluation timing of the coarse-to-fine path against a dense
//! decoder-like baseline that is queried at every grid vertex.

use std::hint::black_box;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{classify_units, evaluate_grid, refine_units, ExtractionConfig, UnitClassification};
use crate::field::TaylorField;
use crate::fitting::FitConfig;
use crate::oracle::Sdf;
use crate::Vec3;

const WIDTH: usize = 8;
const FLOPS_PER_ROUND: usize = 4 * WIDTH;
const WEIGHTS: [f64; WIDTH] = [0.61, -0.42, 0.33, 0.57, -0.29, 0.48, -0.51, 0.37];
const BIAS: [f64; WIDTH] = [0.11, -0.23, 0.05, 0.31, -0.17, 0.29, -0.07, 0.13];
// Neighbor coupling; with it every round is a contraction, so the state
// settles near a fixed point instead of decaying into subnormals.
const COUPLING: f64 = 0.25;

/// Fixed-cost stand-in for a decoder forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseSurrogate {
    pub flops_per_query: usize,
}

impl Default for DenseSurrogate {
    fn default() -> Self {
        Self { flops_per_query: 100_000 }
    }
}

impl DenseSurrogate {
    pub fn new(flops_per_query: usize) -> Self {
        Self { flops_per_query }
    }

    pub fn rounds(&self) -> usize {
        self.flops_per_query.div_ceil(FLOPS_PER_ROUND).max(1)
    }

    /// One query. The result is deterministic and bounded.
    #[inline(never)]
    pub fn query(&self, x: &Vec3) -> f64 {
        let mut h = black_box([x.x, x.y, x.z, 1.0, x.x * x.y, x.y * x.z, x.z * x.x, 0.5]);
        for _ in 0..black_box(self.rounds()) {
            let prev = h;
            for i in 0..WIDTH {
                h[i] = prev[i] * WEIGHTS[i] + (prev[(i + 1) % WIDTH] * COUPLING + BIAS[i]);
            }
        }
        h.iter().sum()
    }

    /// Queries every vertex of the `res^3` grid and returns a checksum.
    pub fn eval_grid(&self, res: usize) -> f64 {
        let step = 1.0 / (res - 1) as f64;
        (0..res)
            .into_par_iter()
            .map(|k| {
                let mut acc = 0.0;
                for j in 0..res {
                    for i in 0..res {
                        let p = Vec3::new(i as f64, j as f64, k as f64) * step - Vec3::repeat(0.5);
                        acc += self.query(&p);
                    }
                }
                acc
            })
            .sum()
    }

    /// One query per position, as when decoding expansion points.
    pub fn eval_points(&self, points: &[Vec3]) -> f64 {
        points.par_iter().map(|p| self.query(p)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Output resolutions, ascending.
    pub resolutions: Vec<usize>,
    pub repetitions: usize,
    pub surrogate: DenseSurrogate,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { resolutions: vec![64, 128], repetitions: 5, surrogate: DenseSurrogate::default() }
    }
}

/// Medians for one output resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionTiming {
    pub mesh_res: usize,
    /// Grid evaluation through the Taylor field and sentinels.
    pub eval_seconds: f64,
    /// Decoder cost of producing the coarse and fine expansion points.
    pub decode_seconds: f64,
    /// Sum of the two above; the point-evaluation cost of the Taylor path.
    pub taylor_path_seconds: f64,
    pub baseline_eval_seconds: f64,
    pub n_coarse_units: usize,
    pub n_expansion_points: usize,
    pub n_taylor_queries: usize,
    pub n_sentinel_queries: usize,
    pub n_dense_queries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub marching_cubes_excluded: bool,
    pub repetitions: usize,
    pub surrogate_flops_per_query: usize,
    pub rows: Vec<ResolutionTiming>,
}

impl TimingReport {
    /// Ratio of a timing column between the last and first resolution.
    pub fn ratio(&self, column: impl Fn(&ResolutionTiming) -> f64) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => column(b) / column(a),
            _ => f64::NAN,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn seconds(f: impl FnOnce()) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64()
}

/// Times both evaluation paths at each resolution. Fitting is done once
/// outside the timed region; marching cubes is never run.
pub fn bench_evaluation<O: Sdf + ?Sized>(
    oracle: &O,
    fit: &FitConfig,
    extraction: &ExtractionConfig,
    bench: &BenchConfig,
) -> Result<TimingReport> {
    let resolutions = &bench.resolutions;
    if resolutions.is_empty() || resolutions.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("resolutions must be non-empty and ascending".into()));
    }
    if bench.repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    let classification = classify_units(oracle, fit, extraction)?;
    let field = refine_units(&classification, oracle, fit, extraction)?;
    let mut rows = Vec::with_capacity(resolutions.len());
    for &res in resolutions {
        let cfg = extraction.with_mesh_res(res);
        rows.push(time_resolution(&field, &classification, &cfg, bench)?);
    }
    Ok(TimingReport {
        marching_cubes_excluded: true,
        repetitions: bench.repetitions,
        surrogate_flops_per_query: bench.surrogate.flops_per_query,
        rows,
    })
}

/// Times one resolution for an already refined field.
pub fn time_resolution(
    field: &TaylorField,
    classification: &UnitClassification,
    cfg: &ExtractionConfig,
    bench: &BenchConfig,
) -> Result<ResolutionTiming> {
    let res = cfg.mesh_res;
    let coarse_centers: Vec<Vec3> = (0..classification.len()).map(|u| classification.unit_center(u)).collect();
    let fine: Vec<Vec3> = field.points().iter().map(|p| p.position).collect();
    let surrogate = bench.surrogate;
    let mut eval = Vec::new();
    let mut decode = Vec::new();
    let mut total = Vec::new();
    let mut dense = Vec::new();
    let mut stats = None;
    for _ in 0..bench.repetitions {
        let d = seconds(|| {
            black_box(surrogate.eval_points(&coarse_centers));
            black_box(surrogate.eval_points(&fine));
        });
        let mut out = None;
        let e = seconds(|| out = Some(evaluate_grid(field, classification, cfg)));
        let (grid, s) = out.expect("timed closure ran")?;
        black_box(grid);
        stats = Some(s);
        eval.push(e);
        decode.push(d);
        total.push(d + e);
        dense.push(seconds(|| {
            black_box(surrogate.eval_grid(res));
        }));
    }
    let stats = stats.expect("at least one repetition");
    Ok(ResolutionTiming {
        mesh_res: res,
        eval_seconds: median(eval),
        decode_seconds: median(decode),
        taylor_path_seconds: median(total),
        baseline_eval_seconds: median(dense),
        n_coarse_units: coarse_centers.len(),
        n_expansion_points: fine.len(),
        n_taylor_queries: stats.n_taylor_queries,
        n_sentinel_queries: stats.n_sentinel_queries,
        n_dense_queries: res * res * res,
    })
}
