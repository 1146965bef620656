//! Taylor-series field: expansion points with local polynomial coefficients,
//! blended over the `k` nearest points with softmin weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{basis_size, scaled_offset, MonomialBasis};
use crate::error::{Error, Result};
use crate::geom::Aabb;
use crate::knn::{KdTree, Neighbor};
use crate::Vec3;

/// Half-width of the region expansion points may occupy.
pub const POSITION_BOUND: f64 = 0.55;

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorCoefficients {
    order: u32,
    values: Vec<f64>,
}

impl TaylorCoefficients {
    pub fn new(order: u32, values: Vec<f64>) -> Result<Self> {
        let expected = basis_size(order)?;
        if values.len() != expected {
            return Err(Error::Dimension { expected, actual: values.len() });
        }
        Ok(Self { order, values })
    }

    pub fn zeros(order: u32) -> Result<Self> {
        Ok(Self { order, values: vec![0.0; basis_size(order)?] })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value of the local polynomial at its own expansion point.
    pub fn constant(&self) -> f64 {
        self.values[0]
    }

    /// Zeroes every term of total degree above `order`.
    pub fn truncate(&mut self, order: u32) {
        let keep = basis_size(order.min(self.order)).expect("order bounded");
        self.values[keep..].iter_mut().for_each(|v| *v = 0.0);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionPoint {
    pub position: Vec3,
    pub coefficients: TaylorCoefficients,
}

/// Evaluates the local Taylor polynomial `T . X(x, center)`.
pub fn eval_local(coeffs: &TaylorCoefficients, x: &Vec3, center: &Vec3, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidScale(h));
    }
    let basis = MonomialBasis::new(coeffs.order)?;
    Ok(basis.dot_scaled(&coeffs.values, scaled_offset(x, center, h)))
}

/// Softmin weights `exp(-theta d_i) / sum_j exp(-theta d_j)`, shifted by the
/// minimum distance before exponentiation.
pub fn softmin_weights(distances: &[f64], theta: f64) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    if let Some(&bad) = distances.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::InvalidDistance(bad));
    }
    let d_min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = distances.iter().map(|d| (-theta * (d - d_min)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Coarse unit label produced by extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitLabel {
    Inside,
    Outside,
    NearSurface,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarUnit {
    pub region: Aabb,
    pub label: UnitLabel,
}

/// Blending and transform parameters shared by every point of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub order: u32,
    /// Local scale: half the side of the fitting cube.
    pub h: f64,
    /// Softmin temperature, inverse world units.
    pub theta: f64,
    pub k: usize,
    pub alpha: f64,
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        basis_size(self.order)?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidScale(self.h));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        if self.k == 0 || self.k > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("k must be in 1..=255, got {}", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// The full shape representation. Immutable once built.
#[derive(Clone, Debug)]
pub struct TaylorField {
    params: FieldParams,
    basis: MonomialBasis,
    points: Vec<ExpansionPoint>,
    index: KdTree,
    far_units: Option<Vec<FarUnit>>,
}

impl TaylorField {
    pub fn new(points: Vec<ExpansionPoint>, params: FieldParams) -> Result<Self> {
        params.validate()?;
        for p in &points {
            if p.coefficients.order != params.order {
                return Err(Error::InvalidParameter(format!(
                    "expansion point of order {} in a field of order {}",
                    p.coefficients.order, params.order
                )));
            }
            if !p.position.iter().all(|c| c.is_finite() && c.abs() <= POSITION_BOUND) {
                return Err(Error::InvalidParameter(format!(
                    "expansion point {:?} outside the normalization cube",
                    p.position
                )));
            }
        }
        let positions: Vec<Vec3> = points.iter().map(|p| p.position).collect();
        Ok(Self {
            basis: MonomialBasis::new(params.order)?,
            index: KdTree::new(&positions),
            params,
            points,
            far_units: None,
        })
    }

    pub fn with_far_units(mut self, far_units: Vec<FarUnit>) -> Self {
        self.far_units = Some(far_units);
        self
    }

    pub fn far_units(&self) -> Option<&[FarUnit]> {
        self.far_units.as_deref()
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn order(&self) -> u32 {
        self.params.order
    }

    pub fn h(&self) -> f64 {
        self.params.h
    }

    pub fn theta(&self) -> f64 {
        self.params.theta
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn points(&self) -> &[ExpansionPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points and coefficients, blended over a different neighbor count.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        let params = FieldParams { k, ..self.params };
        params.validate()?;
        Ok(Self { params, ..self.clone() })
    }

    /// Copy with every coefficient of total degree above `order` set to zero.
    /// The stored order and file layout are unchanged.
    pub fn truncated(&self, order: u32) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.coefficients.truncate(order);
        }
        out
    }

    /// Indices and distances of the `min(k, len)` nearest expansion points.
    pub fn neighbors(&self, x: &Vec3) -> Vec<Neighbor> {
        self.index.knn(x, self.params.k)
    }

    /// Blended field value at `x`.
    pub fn eval(&self, x: &Vec3) -> Result<f64> {
        let mut scratch = Vec::with_capacity(self.params.k);
        self.eval_with(x, &mut scratch)
    }

    /// Element-wise [`TaylorField::eval`], parallel over chunks. Results do
    /// not depend on chunking.
    pub fn eval_batch(&self, xs: &[Vec3]) -> Result<Vec<f64>> {
        if self.points.is_empty() {
            return if xs.is_empty() { Ok(Vec::new()) } else { Err(Error::EmptyField) };
        }
        let mut out = vec![0.0; xs.len()];
        out.par_chunks_mut(1024).zip(xs.par_chunks(1024)).for_each(|(dst, src)| {
            let mut scratch = Vec::with_capacity(self.params.k);
            for (d, x) in dst.iter_mut().zip(src) {
                *d = self.eval_unchecked(x, &mut scratch);
            }
        });
        Ok(out)
    }

    pub(crate) fn eval_with(&self, x: &Vec3, scratch: &mut Vec<Neighbor>) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::EmptyField);
        }
        Ok(self.eval_unchecked(x, scratch))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &Vec3, scratch: &mut Vec<Neighbor>) -> f64 {
        self.index.knn_into(x, self.params.k, scratch);
        self.blend(x, scratch)
    }

    pub(crate) fn index(&self) -> &KdTree {
        &self.index
    }

    /// Softmin blend over `neighbors`, which must be sorted nearest first.
    #[inline]
    pub(crate) fn blend(&self, x: &Vec3, neighbors: &[Neighbor]) -> f64 {
        let d_min = neighbors[0].dist_sq.sqrt();
        let mut total_w = 0.0;
        let mut acc = 0.0;
        for n in neighbors {
            let w = (-self.params.theta * (n.dist_sq.sqrt() - d_min)).exp();
            let p = &self.points[n.index as usize];
            let s = self.basis.dot_scaled(&p.coefficients.values, scaled_offset(x, &p.position, self.params.h));
            total_w += w;
            acc += w * s;
        }
        acc / total_w
    }
}
