//! Box-counting slope of a point cloud.

use serde::Serialize;

use super::{MeasureError, OccupationMeasure};
use crate::stats::linear_fit;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCount {
    /// Box side is `2^-level`.
    pub levels: Vec<u32>,
    pub occupied: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares slope of `log N(2^-k)` against `log 2^k`, where `N(s)`
/// counts the occupied boxes of an `s`-grid anchored at the origin. This is
/// a diagnostic, not a dimension estimator with guarantees.
pub fn box_counting(mu: &OccupationMeasure, levels: &[u32]) -> Result<BoxCount, MeasureError> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 4 {
        return Err(MeasureError::InsufficientScales(levels.len()));
    }
    let occupied: Vec<usize> = levels
        .iter()
        .map(|&k| {
            let s = f64::from(1u32 << k.min(30));
            let mut cells: Vec<(i64, i64)> = mu
                .points
                .iter()
                .map(|p| ((p.x * s).floor() as i64, (p.y * s).floor() as i64))
                .collect();
            cells.sort_unstable();
            cells.dedup();
            cells.len()
        })
        .collect();
    let x: Vec<f64> = levels.iter().map(|&k| f64::from(k) * 2f64.ln()).collect();
    let y: Vec<f64> = occupied.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept) = linear_fit(&x, &y);
    Ok(BoxCount {
        levels,
        occupied,
        slope,
        intercept,
    })
}
