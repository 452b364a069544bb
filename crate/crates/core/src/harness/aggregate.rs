use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trainer::CurvePoint;

/// Normal-approximation quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub env_step: usize,
    pub mean_return: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
    pub retained_seeds: Vec<u64>,
    pub dropped_seeds: Vec<u64>,
    /// Curves had different step grids and were resampled.
    pub resampled: bool,
}

/// One seed's learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedCurve {
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

/// Number of seeds kept out of `n`: `ceil(0.8 n)`.
pub fn retained_count(n: usize) -> usize {
    (4 * n).div_ceil(5)
}

/// Value of a step-sampled curve at `step`: the last point at or before it,
/// or the first point when `step` precedes the curve.
fn value_at(points: &[CurvePoint], step: usize) -> f64 {
    let i = points.partition_point(|p| p.env_step <= step);
    points[i.saturating_sub(1)].mean_episode_return
}

/// Drops the worst fifth of the seeds by final return (ties drop the larger
/// seed first), then reports the mean and 95% interval per step over the
/// rest. When the seeds' step grids differ, every curve is resampled onto
/// the grid with the fewest points, cut at the shortest run.
pub fn aggregate_runs(curves: &[SeedCurve]) -> Result<RunSummary> {
    if curves.len() < 2 {
        return Err(Error::Config(format!(
            "aggregation needs at least two seeds (got {})",
            curves.len()
        )));
    }
    if let Some(c) = curves.iter().find(|c| c.points.is_empty()) {
        return Err(Error::Config(format!("seed {} has an empty curve", c.seed)));
    }
    let final_return = |c: &SeedCurve| c.points.last().map_or(f64::NEG_INFINITY, |p| p.mean_episode_return);
    let mut order: Vec<&SeedCurve> = curves.iter().collect();
    order.sort_by(|a, b| {
        final_return(b)
            .total_cmp(&final_return(a))
            .then(a.seed.cmp(&b.seed))
    });
    let keep = retained_count(curves.len());
    let (kept, dropped) = order.split_at(keep);

    let grid_of = |c: &SeedCurve| c.points.iter().map(|p| p.env_step).collect::<Vec<_>>();
    let first = grid_of(kept[0]);
    let resampled = kept.iter().any(|c| grid_of(c) != first);
    let grid: Vec<usize> = if resampled {
        let coarsest = kept
            .iter()
            .min_by_key(|c| (c.points.len(), c.seed))
            .expect("at least one retained curve");
        let end = kept
            .iter()
            .map(|c| c.points.last().expect("non-empty").env_step)
            .min()
            .expect("at least one retained curve");
        let mut g: Vec<usize> = grid_of(coarsest).into_iter().filter(|&s| s <= end).collect();
        if g.is_empty() {
            g.push(end);
        }
        g
    } else {
        first
    };

    let n = kept.len() as f64;
    let rows = grid
        .iter()
        .map(|&step| {
            let values: Vec<f64> = kept.iter().map(|c| value_at(&c.points, step)).collect();
            let mean = values.iter().sum::<f64>() / n;
            let half = if kept.len() > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                Z_95 * var.sqrt() / n.sqrt()
            } else {
                0.0
            };
            SummaryRow {
                env_step: step,
                mean_return: mean,
                ci_low: mean - half,
                ci_high: mean + half,
                n_seeds: kept.len(),
            }
        })
        .collect();
    let mut retained_seeds: Vec<u64> = kept.iter().map(|c| c.seed).collect();
    let mut dropped_seeds: Vec<u64> = dropped.iter().map(|c| c.seed).collect();
    retained_seeds.sort_unstable();
    dropped_seeds.sort_unstable();
    Ok(RunSummary {
        rows,
        retained_seeds,
        dropped_seeds,
        resampled,
    })
}

pub fn export_csv(summary: &RunSummary, path: &Path) -> Result<()> {
    if summary.rows.is_empty() {
        return Err(Error::Config("nothing to export: summary has no rows".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in &summary.rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| Ok(row?)).collect()
}

/// Mean return per primitive step: each point's value is held over the steps
/// of the update that produced it.
pub fn area_under_curve(points: &[CurvePoint]) -> f64 {
    let Some(last) = points.last() else {
        return 0.0;
    };
    if last.env_step == 0 {
        return last.mean_episode_return;
    }
    let mut prev = 0;
    let mut area = 0.0;
    for p in points {
        area += p.mean_episode_return * (p.env_step - prev) as f64;
        prev = p.env_step;
    }
    area / last.env_step as f64
}
