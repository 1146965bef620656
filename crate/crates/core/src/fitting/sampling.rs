use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::POSITION_BOUND;
use crate::fitting::FitConfig;
use crate::oracle::Sdf;
use crate::Vec3;

const PROJECTION_STEPS: usize = 8;
const PROJECTION_TOLERANCE: f64 = 1e-4;
const ATTEMPTS_PER_POINT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_total: usize,
    /// Share of points drawn uniformly in the cube; the rest are near the
    /// surface.
    pub uniform_fraction: f64,
    pub surface_jitter_sigma: f64,
    pub rng_seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { n_total: 4096, uniform_fraction: 0.25, surface_jitter_sigma: 0.02, rng_seed: 0 }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::InvalidParameter("n_total must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.uniform_fraction) {
            return Err(Error::InvalidParameter(format!("uniform fraction {} outside [0, 1]", self.uniform_fraction)));
        }
        if !(self.surface_jitter_sigma >= 0.0 && self.surface_jitter_sigma.is_finite()) {
            return Err(Error::InvalidParameter("jitter sigma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn n_uniform(&self) -> usize {
        ((self.n_total as f64 * self.uniform_fraction).ceil() as usize).min(self.n_total)
    }
}

fn uniform_point(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
}

/// Moves `x` onto the zero set with Newton steps `x - F grad / |grad|^2`
/// (for a true distance field, `|grad| = 1`).
fn project_to_surface<O: Sdf + ?Sized>(oracle: &O, mut x: Vec3) -> Option<Vec3> {
    for _ in 0..PROJECTION_STEPS {
        let f = oracle.distance(&x);
        if f.abs() <= PROJECTION_TOLERANCE * 1e-3 {
            break;
        }
        let g = oracle.gradient(&x);
        let g2 = g.norm_squared();
        if g2.is_nan() || g2 <= 1e-12 {
            return None;
        }
        x -= g * (f / g2);
    }
    let inside_cube = x.iter().all(|c| c.abs() <= 0.5);
    (inside_cube && oracle.distance(&x).abs() <= PROJECTION_TOLERANCE).then_some(x)
}

/// Uniform points in the normalization cube plus jittered surface
/// projections. Deterministic in `cfg.rng_seed`.
pub fn sample_expansion_points<O: Sdf + ?Sized>(oracle: &O, cfg: &SamplingConfig) -> Result<Vec<Vec3>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let n_uniform = cfg.n_uniform();
    let mut points: Vec<Vec3> = (0..n_uniform).map(|_| uniform_point(&mut rng)).collect();
    let jitter = Normal::new(0.0, cfg.surface_jitter_sigma).expect("validated sigma");
    for _ in n_uniform..cfg.n_total {
        let projected = (0..ATTEMPTS_PER_POINT)
            .find_map(|_| project_to_surface(oracle, uniform_point(&mut rng)))
            .ok_or(Error::NoSurface)?;
        let offset = if cfg.surface_jitter_sigma > 0.0 {
            Vec3::new(jitter.sample(&mut rng), jitter.sample(&mut rng), jitter.sample(&mut rng))
        } else {
            Vec3::zeros()
        };
        points.push((projected + offset).map(|c| c.clamp(-POSITION_BOUND, POSITION_BOUND)));
    }
    Ok(points)
}

/// Even `n^3` grid spanning the fitting cube around `center`, corners
/// included, x fastest.
pub fn local_sample_grid(center: &Vec3, cfg: &FitConfig) -> Vec<Vec3> {
    grid_offsets(cfg).into_iter().map(|o| center + o).collect()
}

pub(crate) fn grid_offsets(cfg: &FitConfig) -> Vec<Vec3> {
    let n = cfg.samples_per_axis;
    let coord = |i: usize| {
        if n == 1 {
            0.0
        } else {
            -cfg.cube_side / 2.0 + cfg.cube_side * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                out.push(Vec3::new(coord(i), coord(j), coord(k)));
            }
        }
    }
    out
}
