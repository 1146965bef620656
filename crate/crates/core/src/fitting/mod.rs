//! Per-point fitting of Taylor coefficients against an oracle, and sampling
//! of expansion points.

mod sampling;
mod solve;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::basis_size;
use crate::error::{Error, Result};
use crate::field::{ExpansionPoint, FieldParams, TaylorField};
use crate::oracle::Sdf;
use crate::seed::rng_for;
use crate::sigmoid::{sigmoid, DEFAULT_ALPHA};
use crate::Vec3;

pub use sampling::{local_sample_grid, sample_expansion_points, SamplingConfig};
pub use solve::{fit_point, LocalFitter, PointFit};

/// Softmin temperature per unit of expansion-point spacing.
pub const THETA_PER_SPACING: f64 = 4.0;

/// Temperature that lets the nearest point dominate at about one spacing.
pub fn default_theta(spacing: f64) -> f64 {
    THETA_PER_SPACING / spacing
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Linear least squares on raw signed distances.
    #[default]
    RawLeastSquares,
    /// Cross-entropy between sigmoid-transformed prediction and target,
    /// minimized by damped Gauss-Newton from the least-squares solution.
    SigmoidCrossEntropy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub order: u32,
    /// Side of the local sampling cube, world units.
    pub cube_side: f64,
    pub samples_per_axis: usize,
    pub objective: Objective,
    pub ridge_lambda: f64,
    pub alpha: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            order: 3,
            cube_side: 0.08,
            samples_per_axis: 5,
            objective: Objective::RawLeastSquares,
            ridge_lambda: 1e-9,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl FitConfig {
    pub fn with_order(self, order: u32) -> Self {
        Self { order, ..self }
    }

    /// Local scale of the fitted polynomials.
    pub fn h(&self) -> f64 {
        self.cube_side / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let n = basis_size(self.order)?;
        if !(self.cube_side > 0.0 && self.cube_side.is_finite()) {
            return Err(Error::InvalidScale(self.cube_side));
        }
        if self.samples_per_axis == 0 || self.samples_per_axis.pow(3) < n {
            return Err(Error::InvalidParameter(format!(
                "{} samples cannot determine {n} coefficients",
                self.samples_per_axis.pow(3)
            )));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ridge lambda must be non-negative, got {}",
                self.ridge_lambda
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Fits every position independently (in parallel). Output order matches
/// `positions`; the first failing index is reported.
pub fn fit_positions<O: Sdf + ?Sized>(oracle: &O, positions: &[Vec3], cfg: &FitConfig) -> Result<Vec<PointFit>> {
    let fitter = LocalFitter::new(cfg)?;
    let results: Vec<Result<PointFit>> = positions.par_iter().map(|c| fitter.fit(oracle, c)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|e| Error::PointFit { index, source: Box::new(e) }))
        .collect()
}

/// Residual distribution over a set of point fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_points: usize,
    pub residual_rms_p50: f64,
    pub residual_rms_p90: f64,
    pub residual_rms_p99: f64,
    pub residual_rms_max: f64,
    pub unconverged: usize,
}

impl FitSummary {
    pub fn from_fits(fits: &[PointFit]) -> Self {
        let mut r: Vec<f64> = fits.iter().map(|f| f.residual_rms).collect();
        r.sort_by(f64::total_cmp);
        let pct = |q: f64| {
            if r.is_empty() {
                0.0
            } else {
                r[((r.len() - 1) as f64 * q).round() as usize]
            }
        };
        Self {
            n_points: fits.len(),
            residual_rms_p50: pct(0.5),
            residual_rms_p90: pct(0.9),
            residual_rms_p99: pct(0.99),
            residual_rms_max: r.last().copied().unwrap_or(0.0),
            unconverged: fits.iter().filter(|f| !f.converged).count(),
        }
    }
}

/// Samples expansion points, fits each one and assembles the field.
pub fn fit_field<O: Sdf + ?Sized>(
    oracle: &O,
    sampling: &SamplingConfig,
    fit: &FitConfig,
    theta: f64,
    k: usize,
) -> Result<TaylorField> {
    fit_field_with_summary(oracle, sampling, fit, theta, k).map(|(f, _)| f)
}

pub fn fit_field_with_summary<O: Sdf + ?Sized>(
    oracle: &O,
    sampling: &SamplingConfig,
    fit: &FitConfig,
    theta: f64,
    k: usize,
) -> Result<(TaylorField, FitSummary)> {
    fit.validate()?;
    let params = FieldParams { order: fit.order, h: fit.h(), theta, k, alpha: fit.alpha };
    params.validate()?;
    let positions = sample_expansion_points(oracle, sampling)?;
    let fits = fit_positions(oracle, &positions, fit)?;
    let summary = FitSummary::from_fits(&fits);
    let points = positions
        .into_iter()
        .zip(fits)
        .map(|(position, f)| ExpansionPoint { position, coefficients: f.coefficients })
        .collect();
    Ok((TaylorField::new(points, params)?, summary))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean_abs: f64,
    pub rms: f64,
    pub max_abs: f64,
}

impl ErrorStats {
    fn from_errors(errors: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut sq, mut max) = (0usize, 0.0, 0.0, 0.0f64);
        for e in errors {
            let a = e.abs();
            n += 1;
            sum += a;
            sq += a * a;
            max = max.max(a);
        }
        let n = n.max(1) as f64;
        Self { mean_abs: sum / n, rms: (sq / n).sqrt(), max_abs: max }
    }
}

/// Field-vs-oracle error on probes drawn from the local cubes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitErrorReport {
    pub n_probes: usize,
    pub raw: ErrorStats,
    pub sigmoid: ErrorStats,
}

/// Probes are uniform inside the fitting cube of a uniformly chosen
/// expansion point.
pub fn field_fit_error<O: Sdf + ?Sized>(
    oracle: &O,
    field: &TaylorField,
    n_probes: usize,
    seed: u64,
) -> Result<FitErrorReport> {
    if n_probes == 0 {
        return Err(Error::InvalidParameter("n_probes must be at least 1".into()));
    }
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    let mut rng = rng_for(seed, "fit-error-probes");
    let h = field.h();
    let probes: Vec<Vec3> = (0..n_probes)
        .map(|_| {
            let c = field.points()[rng.gen_range(0..field.len())].position;
            c + Vec3::new(rng.gen_range(-h..=h), rng.gen_range(-h..=h), rng.gen_range(-h..=h))
        })
        .collect();
    let predicted = field.eval_batch(&probes)?;
    let truth: Vec<f64> = probes.iter().map(|p| oracle.distance(p)).collect();
    let alpha = field.alpha();
    Ok(FitErrorReport {
        n_probes,
        raw: ErrorStats::from_errors(predicted.iter().zip(&truth).map(|(p, t)| p - t)),
        sigmoid: ErrorStats::from_errors(
            predicted.iter().zip(&truth).map(|(p, t)| sigmoid(*p, alpha) - sigmoid(*t, alpha)),
        ),
    })
}
