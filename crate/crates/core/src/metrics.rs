//! Reconstruction metrics: Monte-Carlo volumetric IoU, Chamfer-L1 and
//! F-Score.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{marching_cubes, ScalarGrid};
use crate::geom::Aabb;
use crate::mesh::{Mesh, TriangleBvh};
use crate::oracle::{Oracle, Sdf, SignSource};
use crate::seed::rng_for;
use crate::Vec3;

pub const DEFAULT_TAU: f64 = 0.01;
pub const DEFAULT_POINTS: usize = 100_000;

/// Inside test for a closed mesh by generalized winding number.
#[derive(Clone, Debug)]
pub struct MeshSign {
    bvh: TriangleBvh,
    bounds: Aabb,
}

impl MeshSign {
    pub fn new(mesh: &Mesh) -> Self {
        Self { bvh: TriangleBvh::new(mesh), bounds: mesh.bounds() }
    }
}

impl SignSource for MeshSign {
    fn is_inside(&self, p: &Vec3) -> bool {
        self.bounds.contains(p) && self.bvh.winding_number(p) >= 0.5
    }

    fn bounding_box(&self) -> Aabb {
        self.bounds
    }
}

/// Inside test by trilinear interpolation of a scalar grid (negative is
/// inside). Points off the grid are outside.
#[derive(Clone, Debug)]
pub struct GridSign {
    grid: ScalarGrid,
    bounds: Aabb,
}

impl GridSign {
    pub fn new(grid: ScalarGrid) -> Self {
        let [nx, ny, nz] = grid.dims;
        let mut bounds = Aabb::empty();
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if grid.get(i, j, k) < 0.0 {
                        bounds = bounds.grow(&grid.position(i, j, k));
                    }
                }
            }
        }
        if !bounds.is_empty() {
            let pad = Vec3::repeat(grid.spacing);
            let full = Aabb::new(grid.origin, grid.position(nx - 1, ny - 1, nz - 1));
            bounds = Aabb::new(bounds.min - pad, bounds.max + pad).intersection(&full);
        }
        Self { grid, bounds }
    }

    pub fn value(&self, p: &Vec3) -> Option<f64> {
        let g = &self.grid;
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let u = (p[a] - g.origin[a]) / g.spacing;
            let n = g.dims[a];
            if !(u >= 0.0 && u <= (n - 1) as f64) {
                return None;
            }
            let i = (u.floor() as usize).min(n - 2);
            idx[a] = i;
            frac[a] = u - i as f64;
        }
        let mut v = 0.0;
        for c in 0..8 {
            let o = [c & 1, (c >> 1) & 1, c >> 2];
            let w: f64 = (0..3).map(|a| if o[a] == 1 { frac[a] } else { 1.0 - frac[a] }).product();
            v += w * g.get(idx[0] + o[0], idx[1] + o[1], idx[2] + o[2]);
        }
        Some(v)
    }
}

impl SignSource for GridSign {
    fn is_inside(&self, p: &Vec3) -> bool {
        self.value(p).is_some_and(|v| v < 0.0)
    }

    fn bounding_box(&self) -> Aabb {
        self.bounds
    }
}

/// Monte-Carlo IoU over uniform samples in the union of both bounding
/// boxes. Two empty shapes agree perfectly.
pub fn volumetric_iou(
    pred: &(impl SignSource + ?Sized),
    gt: &(impl SignSource + ?Sized),
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    if n_points == 0 {
        return Err(Error::InvalidParameter("n_points must be at least 1".into()));
    }
    let region = pred.bounding_box().union(&gt.bounding_box());
    if region.is_empty() {
        return Ok(1.0);
    }
    let mut rng = rng_for(seed, "iou-samples");
    let ext = region.extent();
    let points: Vec<Vec3> =
        (0..n_points).map(|_| region.min + Vec3::new(rng.gen(), rng.gen(), rng.gen()).component_mul(&ext)).collect();
    let (inter, union) = points
        .par_iter()
        .map(|p| {
            let (a, b) = (pred.is_inside(p), gt.is_inside(p));
            ((a && b) as usize, (a || b) as usize)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Distances from area-weighted samples on `from` to the surface of `to`.
fn directed_distances(from: &Mesh, to: &TriangleBvh, n_points: usize, seed: u64, stream: &str) -> Vec<f64> {
    let mut rng = rng_for(seed, stream);
    let samples = from.sample_surface(n_points, &mut rng);
    samples.par_iter().map(|p| to.distance(p)).collect()
}

/// Chamfer-L1 and F-Score of two surfaces from one set of samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceScores {
    /// Halved sum of the directed mean distances, times 10.
    pub chamfer_l1_x10: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Samples `n_points` on each mesh and measures point-to-surface distances
/// to the other one.
pub fn surface_scores(pred: &Mesh, gt: &Mesh, tau: f64, n_points: usize, seed: u64) -> Result<SurfaceScores> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if n_points == 0 {
        return Err(Error::InvalidParameter("n_points must be at least 1".into()));
    }
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidParameter(format!("tau must be non-negative, got {tau}")));
    }
    let (bvh_pred, bvh_gt) = (TriangleBvh::new(pred), TriangleBvh::new(gt));
    let d_pred = directed_distances(pred, &bvh_gt, n_points, seed, "surface-samples-pred");
    let d_gt = directed_distances(gt, &bvh_pred, n_points, seed, "surface-samples-gt");
    let mean = |d: &[f64]| d.iter().sum::<f64>() / d.len() as f64;
    let within = |d: &[f64]| d.iter().filter(|&&v| v <= tau).count() as f64 / d.len() as f64;
    let (precision, recall) = (within(&d_pred), within(&d_gt));
    Ok(SurfaceScores {
        chamfer_l1_x10: 10.0 * 0.5 * (mean(&d_pred) + mean(&d_gt)),
        precision,
        recall,
        f_score: if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 },
    })
}

pub fn chamfer_l1(a: &Mesh, b: &Mesh, n_points: usize, seed: u64) -> Result<f64> {
    surface_scores(a, b, DEFAULT_TAU, n_points, seed).map(|s| s.chamfer_l1_x10)
}

pub fn f_score(pred: &Mesh, gt: &Mesh, tau: f64, n_points: usize, seed: u64) -> Result<f64> {
    surface_scores(pred, gt, tau, n_points, seed).map(|s| s.f_score)
}

/// How the predicted mesh answers inside/outside for IoU.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredSign {
    #[default]
    WindingNumber,
    /// Interpolated extraction grid; faster, needs the grid.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub n_points: usize,
    pub tau: f64,
    /// Grid resolution for meshing analytic ground truth.
    pub reference_res: usize,
    pub pred_sign: PredSign,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { n_points: DEFAULT_POINTS, tau: DEFAULT_TAU, reference_res: 256, pred_sign: PredSign::WindingNumber }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub iou: f64,
    pub chamfer_l1_x10: f64,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub tau: f64,
    pub n_points: usize,
    pub seed: u64,
}

/// Surface of an oracle as a mesh: the mesh itself for mesh oracles,
/// marching cubes of the sampled field at `res` otherwise.
pub fn reference_mesh(oracle: &Oracle, res: usize) -> Result<Mesh> {
    if let Oracle::Mesh(m) = oracle {
        return Ok(m.mesh().clone());
    }
    let grid = ScalarGrid::sample_unit_cube(res, |p| oracle.distance(p))?;
    let mesh = marching_cubes(&grid, 0.0);
    if mesh.is_empty() {
        return Err(Error::EmptySurface);
    }
    Ok(mesh)
}

/// Scores a predicted mesh against a ground-truth oracle and its reference
/// mesh. `grid` is required for [`PredSign::Grid`].
pub fn evaluate(
    pred: &Mesh,
    grid: Option<&ScalarGrid>,
    gt: &Oracle,
    gt_mesh: &Mesh,
    cfg: &MetricsConfig,
    seed: u64,
) -> Result<MetricReport> {
    let s = surface_scores(pred, gt_mesh, cfg.tau, cfg.n_points, seed)?;
    let iou = match (cfg.pred_sign, grid) {
        (PredSign::WindingNumber, _) => volumetric_iou(&MeshSign::new(pred), gt, cfg.n_points, seed)?,
        (PredSign::Grid, Some(g)) => volumetric_iou(&GridSign::new(g.clone()), gt, cfg.n_points, seed)?,
        (PredSign::Grid, None) => {
            return Err(Error::InvalidParameter("grid sign test needs the extraction grid".into()))
        }
    };
    Ok(MetricReport {
        iou,
        chamfer_l1_x10: s.chamfer_l1_x10,
        f_score: s.f_score,
        precision: s.precision,
        recall: s.recall,
        tau: cfg.tau,
        n_points: cfg.n_points,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Primitive;
    use proptest::prelude::*;

    fn sphere(r: f64) -> Primitive {
        Primitive::sphere(Vec3::zeros(), r).unwrap()
    }

    fn sphere_mesh(r: f64) -> Mesh {
        Mesh::icosphere(Vec3::zeros(), r, 5)
    }

    #[test]
    fn iou_examples() {
        assert_eq!(volumetric_iou(&sphere(0.3), &sphere(0.3), 10_000, 1).unwrap(), 1.0);
        let v = volumetric_iou(&sphere(0.2), &sphere(0.4), 100_000, 1).unwrap();
        assert!((v - 0.125).abs() < 0.01, "{v}");
        let far = Primitive::sphere(Vec3::new(0.3, 0.0, 0.0), 0.1).unwrap();
        let near = Primitive::sphere(Vec3::new(-0.3, 0.0, 0.0), 0.1).unwrap();
        assert!(volumetric_iou(&far, &near, 100_000, 1).unwrap() < 0.005);
        assert!(volumetric_iou(&sphere(0.2), &sphere(0.2), 0, 1).is_err());
    }

    #[test]
    fn iou_of_empty_shapes_is_one() {
        let empty = Primitive::constant(1.0);
        let g = GridSign::new(ScalarGrid::sample_unit_cube(4, |_| 1.0).unwrap());
        assert!(g.bounding_box().is_empty());
        // The constant oracle reports the unit cube as bounds, but nothing
        // inside it.
        assert_eq!(volumetric_iou(&g, &empty, 1000, 3).unwrap(), 1.0);
    }

    #[test]
    fn mesh_and_grid_signs_agree_with_oracle() {
        let m = MeshSign::new(&sphere_mesh(0.3));
        let g = GridSign::new(ScalarGrid::sample_unit_cube(64, |p| p.norm() - 0.3).unwrap());
        for s in [&m as &dyn SignSource, &g] {
            let v = volumetric_iou(s, &sphere(0.3), 50_000, 2).unwrap();
            assert!(v > 0.98, "{v}");
        }
    }

    #[test]
    fn chamfer_examples() {
        let a = sphere_mesh(0.3);
        assert!(chamfer_l1(&a, &a, 20_000, 4).unwrap() < 1e-12);
        let b = sphere_mesh(0.31);
        let c = chamfer_l1(&a, &b, 100_000, 4).unwrap();
        assert!((c - 0.1).abs() < 0.01, "{c}");
        let ab = chamfer_l1(&a, &b, 100_000, 5).unwrap();
        let ba = chamfer_l1(&b, &a, 100_000, 5).unwrap();
        assert!((ab - ba).abs() < 1e-3);
        assert!(matches!(chamfer_l1(&Mesh::default(), &a, 10, 0), Err(Error::EmptyMesh)));
    }

    #[test]
    fn f_score_examples() {
        let a = sphere_mesh(0.3);
        assert_eq!(f_score(&a, &a, 0.01, 20_000, 1).unwrap(), 1.0);
        let far = f_score(&a, &sphere_mesh(0.32), 0.01, 100_000, 1).unwrap();
        assert!(far < 0.01, "{far}");
        let close = f_score(&a, &sphere_mesh(0.305), 0.01, 100_000, 1).unwrap();
        assert!(close > 0.99, "{close}");
    }

    #[test]
    fn reference_mesh_is_accurate() {
        let o = Oracle::from(sphere(0.3));
        let m = reference_mesh(&o, 128).unwrap();
        let worst = m.vertices.iter().map(|v| (v.norm() - 0.3).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
        assert!(matches!(reference_mesh(&Oracle::from(Primitive::constant(0.4)), 16), Err(Error::EmptySurface)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn translation_invariance(dx in -0.2f64..0.2, dy in -0.2f64..0.2, seed in 0u64..100) {
            let a = Mesh::icosphere(Vec3::zeros(), 0.3, 3);
            let b = Mesh::cuboid(Vec3::zeros(), Vec3::repeat(0.25));
            let t = Vec3::new(dx, dy, 0.1);
            let s0 = surface_scores(&a, &b, 0.02, 5_000, seed).unwrap();
            let s1 = surface_scores(&a.translated(&t), &b.translated(&t), 0.02, 5_000, seed).unwrap();
            prop_assert!((s0.chamfer_l1_x10 - s1.chamfer_l1_x10).abs() < 1e-9);
            prop_assert!((s0.f_score - s1.f_score).abs() < 2e-3);
        }

        #[test]
        fn f_score_monotone_in_tau(t1 in 0.0f64..0.05, t2 in 0.0f64..0.05, seed in 0u64..100) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = Mesh::icosphere(Vec3::zeros(), 0.3, 3);
            let b = Mesh::icosphere(Vec3::new(0.01, 0.0, 0.0), 0.29, 3);
            prop_assert!(f_score(&a, &b, lo, 5_000, seed).unwrap() <= f_score(&a, &b, hi, 5_000, seed).unwrap());
        }

        #[test]
        fn iou_is_symmetric(r1 in 0.1f64..0.4, r2 in 0.1f64..0.4, seed in 0u64..100) {
            let (a, b) = (sphere(r1), sphere(r2));
            prop_assert_eq!(
                volumetric_iou(&a, &b, 5_000, seed).unwrap(),
                volumetric_iou(&b, &a, 5_000, seed).unwrap()
            );
        }
    }
}
