//! Local least-squares and sigmoid cross-entropy solvers.
//!
//! Every expansion point shares the same sample grid in scaled coordinates,
//! so the design matrix and its ridge pseudo-inverse are computed once per
//! configuration and each fit reduces to a matrix-vector product.

use nalgebra::{DMatrix, DVector};

use crate::basis::MonomialBasis;
use crate::error::{Error, Result};
use crate::field::TaylorCoefficients;
use crate::fitting::sampling::grid_offsets;
use crate::fitting::{FitConfig, Objective};
use crate::oracle::Sdf;
use crate::sigmoid::{sigmoid, softplus};
use crate::Vec3;

const RANK_TOLERANCE: f64 = 1e-12;
const GN_MAX_ITERATIONS: usize = 50;
const GN_GRADIENT_TOLERANCE: f64 = 1e-10;
const GN_MAX_HALVINGS: usize = 40;

/// Outcome of fitting one expansion point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFit {
    pub coefficients: TaylorCoefficients,
    /// RMS of raw-space residuals over the sample grid.
    pub residual_rms: f64,
    /// False when the cross-entropy solver stopped at the iteration cap;
    /// the best iterate is returned.
    pub converged: bool,
    pub iterations: usize,
    /// Objective value after each accepted iterate, starting with the
    /// initial solution. Empty for least squares.
    pub objective_history: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LocalFitter {
    cfg: FitConfig,
    offsets: Vec<Vec3>,
    design: DMatrix<f64>,
    /// Ridge pseudo-inverse `V diag(s / (s^2 + lambda)) U^T`.
    solve: DMatrix<f64>,
}

impl LocalFitter {
    pub fn new(cfg: &FitConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = MonomialBasis::new(cfg.order)?;
        let offsets = grid_offsets(cfg);
        let h = cfg.h();
        let mut design = DMatrix::zeros(offsets.len(), basis.len());
        let mut row = vec![0.0; basis.len()];
        for (r, o) in offsets.iter().enumerate() {
            basis.eval_scaled([o.x / h, o.y / h, o.z / h], &mut row);
            for (c, v) in row.iter().enumerate() {
                design[(r, c)] = *v;
            }
        }
        let svd = design.clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let s = &svd.singular_values;
        let s_max = s.max();
        let rank = s.iter().filter(|&&v| v > RANK_TOLERANCE * s_max).count();
        if cfg.ridge_lambda == 0.0 && rank < basis.len() {
            return Err(Error::SingularSystem { rank, columns: basis.len() });
        }
        let filter = DVector::from_iterator(
            s.len(),
            s.iter().map(|&v| if cfg.ridge_lambda == 0.0 { 1.0 / v } else { v / (v * v + cfg.ridge_lambda) }),
        );
        let solve = v_t.transpose() * DMatrix::from_diagonal(&filter) * u.transpose();
        Ok(Self { cfg: *cfg, offsets, design, solve })
    }

    pub fn config(&self) -> &FitConfig {
        &self.cfg
    }

    pub fn n_samples(&self) -> usize {
        self.offsets.len()
    }

    /// Oracle values on the sample grid around `center`.
    pub fn sample<O: Sdf + ?Sized>(&self, oracle: &O, center: &Vec3) -> DVector<f64> {
        DVector::from_iterator(self.offsets.len(), self.offsets.iter().map(|o| oracle.distance(&(center + o))))
    }

    pub fn fit<O: Sdf + ?Sized>(&self, oracle: &O, center: &Vec3) -> Result<PointFit> {
        let targets = self.sample(oracle, center);
        self.fit_samples(&targets)
    }

    /// Fits precomputed grid samples.
    pub fn fit_samples(&self, targets: &DVector<f64>) -> Result<PointFit> {
        if targets.len() != self.offsets.len() {
            return Err(Error::Dimension { expected: self.offsets.len(), actual: targets.len() });
        }
        let ls = &self.solve * targets;
        let (coeffs, converged, iterations, history) = match self.cfg.objective {
            Objective::RawLeastSquares => (ls, true, 0, Vec::new()),
            Objective::SigmoidCrossEntropy => self.gauss_newton(ls, targets),
        };
        let residual = &self.design * &coeffs - targets;
        Ok(PointFit {
            residual_rms: (residual.norm_squared() / targets.len() as f64).sqrt(),
            coefficients: TaylorCoefficients::new(self.cfg.order, coeffs.as_slice().to_vec())?,
            converged,
            iterations,
            objective_history: history,
        })
    }

    /// Raw least-squares objective including the ridge term.
    pub fn least_squares_objective(&self, coeffs: &[f64], targets: &DVector<f64>) -> f64 {
        let t = DVector::from_column_slice(coeffs);
        (&self.design * &t - targets).norm_squared() + self.cfg.ridge_lambda * t.norm_squared()
    }

    /// Cross-entropy objective `sum softplus(a) - y a` with `a = alpha T.X`
    /// and `y = sigma(alpha F)`, plus the ridge term. Differs from the
    /// textbook cross-entropy only by a constant in `T`.
    pub fn cross_entropy_objective(&self, coeffs: &[f64], targets: &DVector<f64>) -> f64 {
        let t = DVector::from_column_slice(coeffs);
        let alpha = self.cfg.alpha;
        let z = &self.design * &t;
        z.iter()
            .zip(targets.iter())
            .map(|(z, f)| {
                let a = alpha * z;
                softplus(a) - sigmoid(*f, alpha) * a
            })
            .sum::<f64>()
            + self.cfg.ridge_lambda * t.norm_squared()
    }

    fn gauss_newton(&self, start: DVector<f64>, targets: &DVector<f64>) -> (DVector<f64>, bool, usize, Vec<f64>) {
        let alpha = self.cfg.alpha;
        let lambda = self.cfg.ridge_lambda;
        let n = start.len();
        let y: DVector<f64> = targets.map(|f| sigmoid(f, alpha));
        let mut t = start;
        let mut obj = self.cross_entropy_objective(t.as_slice(), targets);
        let mut history = vec![obj];
        for iter in 0..GN_MAX_ITERATIONS {
            let p: DVector<f64> = (&self.design * &t).map(|z| sigmoid(z, alpha));
            let grad = self.design.transpose() * (&p - &y) * alpha + &t * (2.0 * lambda);
            if grad.norm() <= GN_GRADIENT_TOLERANCE {
                return (t, true, iter, history);
            }
            let w: DVector<f64> = p.map(|v| alpha * alpha * v * (1.0 - v));
            let mut weighted = self.design.clone();
            for (r, wr) in w.iter().enumerate() {
                weighted.row_mut(r).scale_mut(*wr);
            }
            let mut hessian = self.design.transpose() * weighted;
            for d in 0..n {
                hessian[(d, d)] += 2.0 * lambda;
            }
            let step = match damped_solve(hessian, &grad) {
                Some(s) => s,
                None => return (t, false, iter, history),
            };
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..GN_MAX_HALVINGS {
                let candidate = &t - &step * scale;
                let c_obj = self.cross_entropy_objective(candidate.as_slice(), targets);
                if c_obj < obj {
                    t = candidate;
                    obj = c_obj;
                    history.push(obj);
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                // No descent along the step: stationary to working precision.
                let converged = grad.norm() <= GN_GRADIENT_TOLERANCE.sqrt();
                return (t, converged, iter + 1, history);
            }
        }
        let p: DVector<f64> = (&self.design * &t).map(|z| sigmoid(z, alpha));
        let grad = self.design.transpose() * (&p - &y) * alpha + &t * (2.0 * lambda);
        (t, grad.norm() <= GN_GRADIENT_TOLERANCE, GN_MAX_ITERATIONS, history)
    }
}

/// Cholesky solve with Levenberg damping added until the factorization
/// succeeds.
fn damped_solve(hessian: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = hessian.diagonal().max().max(1e-300);
    let mut mu = 0.0;
    for _ in 0..20 {
        let mut h = hessian.clone();
        for d in 0..h.nrows() {
            h[(d, d)] += mu;
        }
        if let Some(ch) = h.cholesky() {
            return Some(ch.solve(grad));
        }
        mu = if mu == 0.0 { scale * 1e-12 } else { mu * 10.0 };
    }
    None
}

/// Fits one expansion point. Builds a [`LocalFitter`]; prefer reusing one
/// when fitting many points.
pub fn fit_point<O: Sdf + ?Sized>(oracle: &O, center: &Vec3, cfg: &FitConfig) -> Result<PointFit> {
    LocalFitter::new(cfg)?.fit(oracle, center)
}
