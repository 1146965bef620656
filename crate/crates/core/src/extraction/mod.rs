//! Coarse-to-fine meshing of implicit shapes.
//!
//! A coarse grid of units is labelled Inside, Outside or NearSurface from an
//! order-0 fit at each unit center pushed through the sigmoid. Only
//! NearSurface units receive fine expansion points, and only grid vertices
//! inside those units are evaluated through the Taylor field; the rest take a
//! fixed sentinel value.

mod grid;
mod marching;

pub use grid::ScalarGrid;
pub use marching::{enclosed_volume, marching_cubes};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExpansionPoint, FarUnit, FieldParams, TaylorField, UnitLabel};
use crate::fitting::{default_theta, fit_positions, FitConfig, LocalFitter, Objective};
use crate::geom::Aabb;
use crate::knn::Neighbor;
use crate::mesh::Mesh;
use crate::oracle::Sdf;
use crate::sigmoid::{inverse_sigmoid, sigmoid};
use crate::Vec3;

/// Grid value assigned to vertices of Inside units.
pub const INSIDE_SENTINEL: f64 = -1.0;
/// Grid value assigned to vertices of Outside units.
pub const OUTSIDE_SENTINEL: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Units per axis of the coarse classification grid.
    pub coarse_res: usize,
    /// Fine expansion points per axis inside each NearSurface unit.
    pub subdiv: usize,
    pub eps_in: f64,
    pub eps_out: f64,
    /// Grid vertices per axis for marching cubes.
    pub mesh_res: usize,
    pub k: usize,
    /// Softmin temperature; defaults to four per fine-point spacing.
    pub theta: Option<f64>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { coarse_res: 16, subdiv: 2, eps_in: 0.02, eps_out: 0.98, mesh_res: 128, k: 4, theta: None }
    }
}

impl ExtractionConfig {
    pub fn with_mesh_res(self, mesh_res: usize) -> Self {
        Self { mesh_res, ..self }
    }

    pub fn unit_side(&self) -> f64 {
        1.0 / self.coarse_res as f64
    }

    pub fn fine_spacing(&self) -> f64 {
        self.unit_side() / self.subdiv as f64
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or_else(|| default_theta(self.fine_spacing()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0 < self.eps_in && self.eps_in < 0.5 && 0.5 < self.eps_out && self.eps_out < 1.0) {
            return bad(format!(
                "thresholds must satisfy 0 < eps_in < 0.5 < eps_out < 1, got {} and {}",
                self.eps_in, self.eps_out
            ));
        }
        if self.coarse_res < 2 {
            return bad(format!("coarse_res must be at least 2, got {}", self.coarse_res));
        }
        if self.subdiv < 1 {
            return bad("subdiv must be at least 1".into());
        }
        if self.mesh_res < self.coarse_res {
            return bad(format!("mesh_res {} is below coarse_res {}", self.mesh_res, self.coarse_res));
        }
        if self.k == 0 || self.k > u8::MAX as usize {
            return bad(format!("k must be in 1..=255, got {}", self.k));
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("theta must be positive, got {t}"));
            }
        }
        Ok(())
    }

    /// Raw-space thresholds equivalent to `eps_in` and `eps_out`.
    pub fn raw_thresholds(&self, alpha: f64) -> (f64, f64) {
        (inverse_sigmoid(self.eps_in, alpha), inverse_sigmoid(self.eps_out, alpha))
    }

    pub fn label(&self, s0: f64, alpha: f64) -> UnitLabel {
        let p = sigmoid(s0, alpha);
        if p < self.eps_in {
            UnitLabel::Inside
        } else if p > self.eps_out {
            UnitLabel::Outside
        } else {
            UnitLabel::NearSurface
        }
    }
}

/// Labels of the coarse units over `[-0.5, 0.5]^3`, x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitClassification {
    coarse_res: usize,
    /// Order-0 value at each unit center.
    pub s0: Vec<f64>,
    pub labels: Vec<UnitLabel>,
}

impl UnitClassification {
    pub fn from_values(coarse_res: usize, s0: Vec<f64>, cfg: &ExtractionConfig, alpha: f64) -> Self {
        let labels = s0.iter().map(|&s| cfg.label(s, alpha)).collect();
        Self { coarse_res, s0, labels }
    }

    pub fn coarse_res(&self) -> usize {
        self.coarse_res
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn unit_coords(&self, unit: usize) -> [usize; 3] {
        let r = self.coarse_res;
        [unit % r, (unit / r) % r, unit / (r * r)]
    }

    pub fn unit_region(&self, unit: usize) -> Aabb {
        let side = 1.0 / self.coarse_res as f64;
        let [i, j, k] = self.unit_coords(unit);
        let min = Vec3::new(i as f64, j as f64, k as f64) * side - Vec3::repeat(0.5);
        Aabb::new(min, min + Vec3::repeat(side))
    }

    pub fn unit_center(&self, unit: usize) -> Vec3 {
        self.unit_region(unit).center()
    }

    /// Unit holding `p`; points on a shared face go to the lower index.
    pub fn unit_of(&self, p: &Vec3) -> usize {
        let r = self.coarse_res;
        let axis = |v: f64| {
            let u = (v + 0.5) * r as f64;
            (u.ceil() as i64 - 1).clamp(0, r as i64 - 1) as usize
        };
        (axis(p.z) * r + axis(p.y)) * r + axis(p.x)
    }

    pub fn count(&self, label: UnitLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn near_surface_units(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&u| self.labels[u] == UnitLabel::NearSurface).collect()
    }

    pub fn far_units(&self) -> Vec<FarUnit> {
        (0..self.labels.len())
            .filter(|&u| self.labels[u] != UnitLabel::NearSurface)
            .map(|u| FarUnit { region: self.unit_region(u), label: self.labels[u] })
            .collect()
    }
}

fn unit_centers(coarse_res: usize) -> Vec<Vec3> {
    let side = 1.0 / coarse_res as f64;
    let c = |i: usize| -0.5 + (i as f64 + 0.5) * side;
    (0..coarse_res.pow(3))
        .map(|u| {
            let (i, j, k) = (u % coarse_res, (u / coarse_res) % coarse_res, u / (coarse_res * coarse_res));
            Vec3::new(c(i), c(j), c(k))
        })
        .collect()
}

/// Labels every coarse unit from the mean of the oracle over the local fit
/// grid at its center.
pub fn classify_units<O: Sdf + ?Sized>(
    oracle: &O,
    fit: &FitConfig,
    cfg: &ExtractionConfig,
) -> Result<UnitClassification> {
    cfg.validate()?;
    let cfg0 = FitConfig { order: 0, objective: Objective::RawLeastSquares, ..*fit };
    let fitter = LocalFitter::new(&cfg0)?;
    let s0 = unit_centers(cfg.coarse_res)
        .par_iter()
        .map(|c| fitter.fit(oracle, c).map(|f| f.coefficients.constant()))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitClassification::from_values(cfg.coarse_res, s0, cfg, fit.alpha))
}

/// Labels every coarse unit from a field's value at the unit center. Used
/// when only a stored field is available.
pub fn classify_units_from_field(field: &TaylorField, cfg: &ExtractionConfig) -> Result<UnitClassification> {
    cfg.validate()?;
    let s0 = field.eval_batch(&unit_centers(cfg.coarse_res))?;
    Ok(UnitClassification::from_values(cfg.coarse_res, s0, cfg, field.alpha()))
}

/// Positions of the fine expansion points: a `subdiv^3` cell-centered
/// lattice in every NearSurface unit, in unit order.
pub fn fine_positions(classification: &UnitClassification, cfg: &ExtractionConfig) -> Vec<Vec3> {
    let s = cfg.subdiv;
    let step = 1.0 / (classification.coarse_res() * s) as f64;
    let mut out = Vec::new();
    for u in classification.near_surface_units() {
        let min = classification.unit_region(u).min;
        for k in 0..s {
            for j in 0..s {
                for i in 0..s {
                    out.push(min + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * step);
                }
            }
        }
    }
    out
}

/// Fits fine expansion points inside every NearSurface unit. The returned
/// field carries the far-unit labels.
pub fn refine_units<O: Sdf + ?Sized>(
    classification: &UnitClassification,
    oracle: &O,
    fit: &FitConfig,
    cfg: &ExtractionConfig,
) -> Result<TaylorField> {
    cfg.validate()?;
    let positions = fine_positions(classification, cfg);
    if positions.is_empty() {
        return Err(Error::EmptySurface);
    }
    let fits = fit_positions(oracle, &positions, fit)?;
    let params = FieldParams { order: fit.order, h: fit.h(), theta: cfg.theta(), k: cfg.k, alpha: fit.alpha };
    let points = positions
        .into_iter()
        .zip(fits)
        .map(|(position, f)| ExpansionPoint { position, coefficients: f.coefficients })
        .collect();
    Ok(TaylorField::new(points, params)?.with_far_units(classification.far_units()))
}

/// Query counts of one grid evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridStats {
    pub n_taylor_queries: usize,
    pub n_sentinel_queries: usize,
}

/// Expansion points that may be nearest to some vertex of a block, sorted
/// by distance to the block center so each query can stop early.
#[derive(Default)]
struct Candidates {
    center: [f64; 3],
    /// `(distance to center, slot)`, ascending.
    order: Vec<(f64, u32)>,
    coords: Vec<[f64; 3]>,
    index: Vec<u32>,
    to_center: Vec<f64>,
}

impl Candidates {
    fn load(&mut self, tree: &crate::knn::KdTree, center: &Vec3, slots: &[u32]) {
        self.center = [center.x, center.y, center.z];
        self.order.clear();
        for &s in slots {
            let (c, _) = tree.slot(s);
            self.order.push((crate::knn::dist_sq(&self.center, c).sqrt(), s));
        }
        self.order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.coords.clear();
        self.index.clear();
        self.to_center.clear();
        for &(d, s) in &self.order {
            let (c, idx) = tree.slot(s);
            self.coords.push(*c);
            self.index.push(idx);
            self.to_center.push(d);
        }
    }

    /// The `k` nearest candidates to `p` under the tree's ordering, with
    /// bit-identical squared distances.
    #[inline]
    fn nearest(&self, p: &Vec3, k: usize, best: &mut Vec<Neighbor>) {
        let q = [p.x, p.y, p.z];
        let r = crate::knn::dist_sq(&q, &self.center).sqrt();
        best.clear();
        let mut worst = f64::INFINITY;
        // Slack keeps the triangle-inequality cut conservative under rounding.
        let mut cutoff = f64::INFINITY;
        for i in 0..self.index.len() {
            if self.to_center[i] - r > cutoff {
                break;
            }
            let d = crate::knn::dist_sq(&q, &self.coords[i]);
            // Equal distances still go through the index tie-break.
            if d <= worst {
                crate::knn::insert(best, k, Neighbor { index: self.index[i], dist_sq: d });
                if best.len() == k {
                    worst = best[k - 1].dist_sq;
                    cutoff = worst.sqrt() * (1.0 + 1e-9) + 1e-12;
                }
            }
        }
    }
}

/// Grid vertices per axis sharing one candidate list during evaluation.
const BLOCK: usize = 4;

/// Evaluates the `mesh_res^3` vertex grid: sentinels in far units, blended
/// Taylor values in NearSurface units.
///
/// Vertices are processed in small blocks. Each block gathers every
/// expansion point that can be among the `k` nearest of any of its vertices
/// (the `k`-th distance from the block center plus twice the half-diagonal
/// bounds it), then ranks only those. Values are bit-identical to
/// [`TaylorField::eval`].
pub fn evaluate_grid(
    field: &TaylorField,
    classification: &UnitClassification,
    cfg: &ExtractionConfig,
) -> Result<(ScalarGrid, GridStats)> {
    cfg.validate()?;
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    let res = cfg.mesh_res;
    let coarse = classification.coarse_res();
    if coarse.pow(3) != classification.len() {
        return Err(Error::Dimension { expected: coarse.pow(3), actual: classification.len() });
    }
    let step = 1.0 / (res - 1) as f64;
    let position = |i: usize, j: usize, k: usize| Vec3::new(i as f64, j as f64, k as f64) * step - Vec3::repeat(0.5);
    // Unit index per vertex index along one axis, exact in integers.
    let unit_axis: Vec<usize> =
        (0..res).map(|i| ((i * coarse).div_ceil(res - 1)).saturating_sub(1).min(coarse - 1)).collect();
    let mut span = vec![(usize::MAX, 0usize); coarse];
    for (i, &u) in unit_axis.iter().enumerate() {
        span[u].0 = span[u].0.min(i);
        span[u].1 = i + 1;
    }
    let mut values = Vec::with_capacity(res * res * res);
    for k in 0..res {
        for j in 0..res {
            for i in 0..res {
                let unit = (unit_axis[k] * coarse + unit_axis[j]) * coarse + unit_axis[i];
                values.push(match classification.labels[unit] {
                    UnitLabel::Inside => INSIDE_SENTINEL,
                    UnitLabel::Outside => OUTSIDE_SENTINEL,
                    UnitLabel::NearSurface => f64::NAN,
                });
            }
        }
    }
    let kk = field.k();
    let tree = field.index();
    let per_unit: Vec<Vec<(usize, f64)>> = classification
        .near_surface_units()
        .par_iter()
        .map(|&unit| {
            let [ui, uj, uk] = classification.unit_coords(unit);
            let (ranges_i, ranges_j, ranges_k) = (span[ui], span[uj], span[uk]);
            let mut out = Vec::new();
            let mut slots = Vec::new();
            let mut cands = Candidates::default();
            let mut best: Vec<Neighbor> = Vec::with_capacity(kk);
            for k0 in (ranges_k.0..ranges_k.1).step_by(BLOCK) {
                let k1 = (k0 + BLOCK).min(ranges_k.1);
                for j0 in (ranges_j.0..ranges_j.1).step_by(BLOCK) {
                    let j1 = (j0 + BLOCK).min(ranges_j.1);
                    for i0 in (ranges_i.0..ranges_i.1).step_by(BLOCK) {
                        let i1 = (i0 + BLOCK).min(ranges_i.1);
                        let lo = position(i0, j0, k0);
                        let hi = position(i1 - 1, j1 - 1, k1 - 1);
                        let center = (lo + hi) * 0.5;
                        let half_diag = (hi - lo).norm() * 0.5;
                        tree.knn_into(&center, kk, &mut best);
                        let reach =
                            if best.len() < kk { f64::INFINITY } else { best[kk - 1].dist_sq.sqrt() + 2.0 * half_diag };
                        tree.slots_within(&center, reach * (1.0 + 1e-9) + 1e-12, &mut slots);
                        cands.load(tree, &center, &slots);
                        for k in k0..k1 {
                            for j in j0..j1 {
                                for i in i0..i1 {
                                    let p = position(i, j, k);
                                    cands.nearest(&p, kk, &mut best);
                                    out.push(((k * res + j) * res + i, field.blend(&p, &best)));
                                }
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut n_taylor = 0;
    for unit in per_unit {
        n_taylor += unit.len();
        for (idx, v) in unit {
            values[idx] = v;
        }
    }
    let stats = GridStats { n_taylor_queries: n_taylor, n_sentinel_queries: values.len() - n_taylor };
    Ok((ScalarGrid::unit_cube(res, values)?, stats))
}

/// Wall-clock seconds of each pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub classify_seconds: f64,
    pub refine_seconds: f64,
    pub eval_seconds: f64,
    pub marching_cubes_seconds: f64,
}

/// Everything produced by one run of the pipeline.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub classification: UnitClassification,
    pub field: TaylorField,
    pub grid: ScalarGrid,
    pub stats: GridStats,
    pub mesh: Mesh,
    pub times: StageTimes,
}

impl Extraction {
    pub fn n_expansion_points(&self) -> usize {
        self.field.len()
    }
}

/// Full pipeline against an oracle: classify, refine, evaluate, mesh.
pub fn extract<O: Sdf + ?Sized>(oracle: &O, fit: &FitConfig, cfg: &ExtractionConfig) -> Result<Extraction> {
    let t = Instant::now();
    let classification = classify_units(oracle, fit, cfg)?;
    let classify_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let field = refine_units(&classification, oracle, fit, cfg)?;
    let refine_seconds = t.elapsed().as_secs_f64();
    mesh_field(field, classification, cfg, classify_seconds, refine_seconds)
}

/// Pipeline for a stored field: classify from the field itself, then
/// evaluate and mesh. The field's own `k` and `theta` are used.
pub fn extract_from_field(field: TaylorField, cfg: &ExtractionConfig) -> Result<Extraction> {
    let t = Instant::now();
    let classification = classify_units_from_field(&field, cfg)?;
    if classification.count(UnitLabel::NearSurface) == 0 {
        return Err(Error::EmptySurface);
    }
    let classify_seconds = t.elapsed().as_secs_f64();
    mesh_field(field, classification, cfg, classify_seconds, 0.0)
}

fn mesh_field(
    field: TaylorField,
    classification: UnitClassification,
    cfg: &ExtractionConfig,
    classify_seconds: f64,
    refine_seconds: f64,
) -> Result<Extraction> {
    let t = Instant::now();
    let (grid, stats) = evaluate_grid(&field, &classification, cfg)?;
    let eval_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let mesh = marching_cubes(&grid, 0.0);
    let marching_cubes_seconds = t.elapsed().as_secs_f64();
    Ok(Extraction {
        classification,
        field,
        grid,
        stats,
        mesh,
        times: StageTimes { classify_seconds, refine_seconds, eval_seconds, marching_cubes_seconds },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{sample_expansion_points, SamplingConfig};
    use crate::oracle::Primitive;
    use proptest::prelude::*;

    fn sphere() -> Primitive {
        Primitive::sphere(Vec3::zeros(), 0.3).unwrap()
    }

    #[test]
    fn classification_examples() {
        let cfg = ExtractionConfig::default();
        let c = classify_units(&sphere(), &FitConfig::default(), &cfg).unwrap();
        assert_eq!(c.len(), 4096);
        let corner = c.unit_of(&Vec3::repeat(0.46875));
        assert_eq!(c.unit_center(corner), Vec3::repeat(0.46875));
        assert!((c.s0[corner] - 0.512).abs() < 0.01);
        assert_eq!(c.labels[corner], UnitLabel::Outside);
        let center = c.unit_of(&Vec3::repeat(0.03125));
        assert!((sphere().distance(&Vec3::repeat(0.03125)) + 0.246).abs() < 1e-3);
        // The grid mean sits above the center value since |x| is convex.
        assert!((c.s0[center] + 0.2313).abs() < 1e-3);
        assert!((sigmoid(-0.246, 32.0) - 3.8e-4).abs() < 1e-5);
        assert!(sigmoid(c.s0[center], 32.0) < cfg.eps_in);
        assert_eq!(c.labels[center], UnitLabel::Inside);
        for u in 0..c.len() {
            if c.s0[u].abs() <= 0.05 {
                assert_eq!(c.labels[u], UnitLabel::NearSurface);
            }
        }
    }

    #[test]
    fn sigma_and_raw_thresholds_agree() {
        let cfg = ExtractionConfig::default();
        let alpha = 32.0;
        let (lo, hi) = cfg.raw_thresholds(alpha);
        for shape in [
            sphere(),
            Primitive::cuboid(Vec3::zeros(), Vec3::repeat(0.25)).unwrap(),
            Primitive::torus(Vec3::zeros(), 0.25, 0.1).unwrap(),
        ] {
            let c = classify_units(&shape, &FitConfig::default(), &cfg).unwrap();
            for (s, l) in c.s0.iter().zip(&c.labels) {
                let raw = if *s < lo {
                    UnitLabel::Inside
                } else if *s > hi {
                    UnitLabel::Outside
                } else {
                    UnitLabel::NearSurface
                };
                assert_eq!(raw, *l, "s0 = {s}");
            }
        }
    }

    #[test]
    fn tie_rule_prefers_lower_unit() {
        let c = UnitClassification::from_values(4, vec![0.0; 64], &ExtractionConfig::default(), 32.0);
        assert_eq!(c.unit_of(&Vec3::new(0.0, -0.5, -0.5)), 1);
        assert_eq!(c.unit_of(&Vec3::new(0.0001, -0.5, -0.5)), 2);
        assert_eq!(c.unit_of(&Vec3::repeat(0.5)), 63);
        assert_eq!(c.unit_of(&Vec3::repeat(-0.5)), 0);
    }

    #[test]
    fn empty_surface_is_an_error() {
        let cfg = ExtractionConfig::default();
        let fit = FitConfig::default();
        let far = Primitive::constant(0.4);
        let c = classify_units(&far, &fit, &cfg).unwrap();
        assert_eq!(c.count(UnitLabel::Outside), c.len());
        assert!(matches!(refine_units(&c, &far, &fit, &cfg), Err(Error::EmptySurface)));
    }

    #[test]
    fn subdiv_one_uses_unit_centers() {
        let cfg = ExtractionConfig { subdiv: 1, ..Default::default() };
        let c = classify_units(&sphere(), &FitConfig::default(), &cfg).unwrap();
        let pos = fine_positions(&c, &cfg);
        let near = c.near_surface_units();
        assert_eq!(pos.len(), near.len());
        for (p, u) in pos.iter().zip(near) {
            assert!((p - c.unit_center(u)).norm() < 1e-15);
        }
    }

    #[test]
    fn point_count_ignores_mesh_resolution() {
        let fit = FitConfig::default();
        let counts: Vec<usize> = [64, 128]
            .iter()
            .map(|&r| {
                let cfg = ExtractionConfig::default().with_mesh_res(r);
                let c = classify_units(&sphere(), &fit, &cfg).unwrap();
                let f = refine_units(&c, &sphere(), &fit, &cfg).unwrap();
                assert_eq!(f.len(), c.count(UnitLabel::NearSurface) * 8);
                f.len()
            })
            .collect();
        assert_eq!(counts[0], counts[1]);
    }

    #[test]
    fn all_outside_grid_is_constant() {
        let cfg = ExtractionConfig { coarse_res: 4, mesh_res: 8, ..Default::default() };
        let mut c = UnitClassification::from_values(4, vec![1.0; 64], &cfg, 32.0);
        let fit = FitConfig::default();
        let f = refine_units(&UnitClassification::from_values(4, vec![0.0; 64], &cfg, 32.0), &sphere(), &fit, &cfg)
            .unwrap();
        c.labels.iter_mut().for_each(|l| *l = UnitLabel::Outside);
        let (g, stats) = evaluate_grid(&f, &c, &cfg).unwrap();
        assert!(g.values.iter().all(|&v| v == OUTSIDE_SENTINEL));
        assert_eq!(stats.n_taylor_queries, 0);
        assert_eq!(stats.n_sentinel_queries, 512);
        assert!(marching_cubes(&g, 0.0).is_empty());
    }

    #[test]
    fn grid_values_match_pointwise_eval() {
        let fit = FitConfig::default();
        for (shape, res) in [(sphere(), 64), (Primitive::torus(Vec3::zeros(), 0.25, 0.1).unwrap(), 37)] {
            let cfg = ExtractionConfig::default().with_mesh_res(res);
            let c = classify_units(&shape, &fit, &cfg).unwrap();
            let f = refine_units(&c, &shape, &fit, &cfg).unwrap();
            let (g, stats) = evaluate_grid(&f, &c, &cfg).unwrap();
            let mut n = 0;
            for k in 0..res {
                for j in 0..res {
                    for i in 0..res {
                        let p = g.position(i, j, k);
                        let v = g.get(i, j, k);
                        match c.labels[c.unit_of(&p)] {
                            UnitLabel::NearSurface => {
                                n += 1;
                                assert_eq!(v.to_bits(), f.eval(&p).unwrap().to_bits());
                            }
                            UnitLabel::Inside => assert_eq!(v, INSIDE_SENTINEL),
                            UnitLabel::Outside => assert_eq!(v, OUTSIDE_SENTINEL),
                        }
                    }
                }
            }
            assert_eq!(n, stats.n_taylor_queries);
        }
    }

    #[test]
    fn sphere_taylor_fraction_and_mesh() {
        let fit = FitConfig::default();
        let cfg = ExtractionConfig::default();
        let e = extract(&sphere(), &fit, &cfg).unwrap();
        let total = e.stats.n_taylor_queries + e.stats.n_sentinel_queries;
        assert_eq!(total, 128usize.pow(3));
        // Independent count of units with |mean| <= ln(49)/32: 1240.
        assert_eq!(e.classification.count(UnitLabel::NearSurface), 1240);
        // 128 vertices split 8 per unit along each axis, so the vertex
        // fraction equals the unit fraction.
        assert_eq!(e.stats.n_taylor_queries, 1240 * 512);
        let topo = e.mesh.topology();
        assert!(topo.is_closed() && topo.is_consistently_oriented());
        assert_eq!(topo.euler_characteristic(), 2);
    }

    #[test]
    fn extraction_from_field_meshes_sphere() {
        let sampling = SamplingConfig { n_total: 3000, ..Default::default() };
        let fit = FitConfig::default();
        let field = crate::fitting::fit_field(&sphere(), &sampling, &fit, 64.0, 4).unwrap();
        let cfg = ExtractionConfig::default().with_mesh_res(64);
        let e = extract_from_field(field, &cfg).unwrap();
        let topo = e.mesh.topology();
        assert!(topo.is_closed());
        assert_eq!(topo.euler_characteristic(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(3))]
        // Projected surface points always fall in NearSurface units.
        #[test]
        fn surface_is_covered(seed in 0u64..1000) {
            let cfg = ExtractionConfig::default();
            let sampling = SamplingConfig {
                n_total: 1000,
                uniform_fraction: 0.0,
                surface_jitter_sigma: 0.0,
                rng_seed: seed,
            };
            for shape in [
                sphere(),
                Primitive::cuboid(Vec3::zeros(), Vec3::repeat(0.25)).unwrap(),
                Primitive::torus(Vec3::zeros(), 0.25, 0.1).unwrap(),
            ] {
                let c = classify_units(&shape, &FitConfig::default(), &cfg).unwrap();
                for p in sample_expansion_points(&shape, &sampling).unwrap() {
                    prop_assert_eq!(c.labels[c.unit_of(&p)], UnitLabel::NearSurface);
                }
            }
        }
    }
}
