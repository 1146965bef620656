use serde::{Deserialize, Serialize};

use crate::basis::MAX_ORDER;
use crate::error::{Error, Result};
use crate::extraction::{classify_units, evaluate_grid, marching_cubes, refine_units, ExtractionConfig};
use crate::fitting::FitConfig;
use crate::mesh::Mesh;
use crate::metrics::{evaluate, MetricsConfig};
use crate::oracle::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AblationAxis {
    /// Coefficients above the value's degree are zeroed; no refit.
    Order,
    /// Neighbors blended per query.
    K,
}

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub axis: AblationAxis,
    pub value: usize,
    pub iou: f64,
    pub chamfer_l1_x10: f64,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub n_expansion_points: usize,
    pub n_triangles: usize,
}

fn check_values(axis: AblationAxis, values: &[usize], fit: &FitConfig) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("ablation needs at least one value".into()));
    }
    for &v in values {
        let ok = match axis {
            AblationAxis::Order => v <= fit.order as usize && v <= MAX_ORDER as usize,
            AblationAxis::K => (1..=u8::MAX as usize).contains(&v),
        };
        if !ok {
            return Err(Error::InvalidParameter(match axis {
                AblationAxis::Order => format!("order {v} exceeds the fitted order {}", fit.order),
                AblationAxis::K => format!("k = {v} outside 1..=255"),
            }));
        }
    }
    Ok(())
}

/// Fits the coarse-to-fine field once at `fit.order`, then meshes and
/// scores one variant per value. Every row uses the same metric seed.
#[allow(clippy::too_many_arguments)]
pub fn ablate(
    oracle: &Oracle,
    gt_mesh: &Mesh,
    fit: &FitConfig,
    extraction: &ExtractionConfig,
    metrics: &MetricsConfig,
    axis: AblationAxis,
    values: &[usize],
    seed: u64,
) -> Result<Vec<AblationRow>> {
    check_values(axis, values, fit)?;
    let classification = classify_units(oracle, fit, extraction)?;
    let field = refine_units(&classification, oracle, fit, extraction)?;
    values
        .iter()
        .map(|&value| {
            let variant = match axis {
                AblationAxis::Order => field.truncated(value as u32),
                AblationAxis::K => field.with_k(value)?,
            };
            let (grid, _) = evaluate_grid(&variant, &classification, extraction)?;
            let mesh = marching_cubes(&grid, 0.0);
            if mesh.is_empty() {
                return Err(Error::EmptySurface);
            }
            let report = evaluate(&mesh, Some(&grid), oracle, gt_mesh, metrics, seed)?;
            Ok(AblationRow {
                axis,
                value,
                iou: report.iou,
                chamfer_l1_x10: report.chamfer_l1_x10,
                f_score: report.f_score,
                precision: report.precision,
                recall: report.recall,
                n_expansion_points: variant.len(),
                n_triangles: mesh.triangles.len(),
            })
        })
        .collect()
}
