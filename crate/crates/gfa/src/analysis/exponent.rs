//! Growth-exponent estimation from recorded growth traces.
//!
//! Fits diam(n) ~ C·n^β on a log-log grid using the median diameter across
//! traces at each grid point. Medians are robust to the occasional straggler
//! run; the per-seed slopes expose the spread behind the pooled fit.

use crate::error::{GfaError, Result};
use crate::growth::GrowthTrace;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Fitted exponent β in diam(n) ~ C·n^β.
    pub slope: f64,
    /// Fitted ln C.
    pub intercept: f64,
    pub r_squared: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Cluster sizes the fit was evaluated at.
    pub grid: Vec<usize>,
    /// Median diameter across traces at each grid point.
    pub medians: Vec<f64>,
    /// Slope of the same fit restricted to each trace individually.
    pub per_seed_slopes: Vec<f64>,
}

const GRID_POINTS: usize = 25;

/// Geometric grid of cluster sizes in `[n_min, n_max]`, deduplicated after
/// rounding. Always contains both endpoints.
fn size_grid(n_min: usize, n_max: usize) -> Vec<usize> {
    let lo = n_min as f64;
    let hi = n_max as f64;
    let mut grid: Vec<usize> = (0..GRID_POINTS)
        .map(|i| {
            let t = i as f64 / (GRID_POINTS - 1) as f64;
            (lo * (hi / lo).powf(t)).round() as usize
        })
        .collect();
    grid.dedup();
    grid
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Least squares of ln(diam) on ln(n). Returns (slope, intercept, r²).
fn loglog_fit(grid: &[usize], diams: &[f64]) -> Result<(f64, f64, f64)> {
    if diams.iter().any(|&d| d <= 0.0) {
        return Err(GfaError::DegenerateFit("non-positive diameter in fit window".into()));
    }
    let xs: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = diams.iter().map(|&d| d.ln()).collect();
    let m = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / m;
    let y_bar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let syy: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GfaError::DegenerateFit("fit window has a single distinct size".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let r_squared = if syy == 0.0 {
        // All medians equal: slope is 0 and the fit is exact.
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((slope, intercept, r_squared))
}

pub fn growth_exponent(
    traces: &[GrowthTrace],
    n_min: usize,
    n_max: usize,
) -> Result<ExponentFit> {
    if traces.len() < 3 {
        return Err(GfaError::InvalidInput(format!(
            "need at least 3 traces for a median fit, got {}",
            traces.len()
        )));
    }
    if n_min < 100 {
        return Err(GfaError::InvalidInput("n_min must be at least 100".into()));
    }
    if n_max <= n_min {
        return Err(GfaError::InvalidInput("n_max must exceed n_min".into()));
    }
    for t in traces {
        // Endpoint coverage implies full-window coverage: the diameter
        // history is one contiguous entry per cluster size.
        if t.diam_at(n_min).is_none() || t.diam_at(n_max).is_none() {
            return Err(GfaError::InvalidInput(format!(
                "trace (seed {}) does not cover sizes {n_min}..={n_max}",
                t.seed
            )));
        }
    }

    let grid = size_grid(n_min, n_max);
    let mut medians = Vec::with_capacity(grid.len());
    for &n in &grid {
        let mut ds: Vec<f64> = traces.iter().map(|t| t.diam_at(n).unwrap()).collect();
        medians.push(median(&mut ds));
    }
    let (slope, intercept, r_squared) = loglog_fit(&grid, &medians)?;

    let mut per_seed_slopes = Vec::with_capacity(traces.len());
    for t in traces {
        let ds: Vec<f64> = grid.iter().map(|&n| t.diam_at(n).unwrap()).collect();
        let (s, _, _) = loglog_fit(&grid, &ds)?;
        per_seed_slopes.push(s);
    }

    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        n_min,
        n_max,
        grid,
        medians,
        per_seed_slopes,
    })
}
