//! Power-law fits `y ≈ c·t^(−α)` by least squares in log-log space.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use super::density::DensityTrace;
use crate::error::{CpsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub c: f64,
    pub alpha: f64,
    /// Root-mean-square residual of `ln y` around the fitted line.
    pub residual: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl RateFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.c * t.powf(-self.alpha)
    }

    pub fn write_csv<W: Write>(fits: &[RateFit], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for f in fits {
            out.serialize(f)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<RateFit>> {
        let mut rd = csv::Reader::from_reader(r);
        Ok(rd.deserialize().collect::<std::result::Result<Vec<RateFit>, _>>()?)
    }
}

/// Fits the points whose `t` lies in `[t_min, t_max]`.
pub fn fit_points(points: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let (t_min, t_max) = window;
    let inside: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(t, _)| t >= t_min && t <= t_max && t > 0.0).collect();
    if inside.len() < 3 {
        return Err(CpsError::TooFewPoints(inside.len()));
    }
    if let Some(&(t, value)) = inside.iter().find(|&&(_, y)| y.is_nan() || y <= 0.0) {
        return Err(CpsError::NonPositive { t, value });
    }
    let k = inside.len() as f64;
    let xs: Vec<f64> = inside.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(CpsError::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit { c: intercept.exp(), alpha: -slope, residual: (sse / k).sqrt(), t_min, t_max, points: inside.len() })
}

/// Fits `r̂(t)` of a density trace over `window`.
pub fn fit_power_law(trace: &DensityTrace, window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = trace.rows.iter().map(|r| (r.t, r.r)).collect();
    fit_points(&pts, window)
}

/// `points` times spaced geometrically from `t_min` to `t_max` inclusive.
pub fn geometric_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max >= t_min && points >= 2);
    let ratio = (t_max / t_min).powf(1.0 / (points - 1) as f64);
    let mut grid: Vec<f64> = (0..points).map(|i| t_min * ratio.powi(i as i32)).collect();
    grid[points - 1] = t_max;
    grid
}

/// `0, 1, 2, 4, ...` below `t_max`, then `t_max` itself.
pub fn default_snapshot_grid(t_max: f64) -> Vec<f64> {
    let mut grid = vec![0.0];
    let mut t = 1.0;
    while t < t_max {
        grid.push(t);
        t *= 2.0;
    }
    if t_max > 0.0 {
        grid.push(t_max);
    }
    grid
}

/// First sampled time `s >= t` with `r(s) <= r(t) - p(t)/4`, if any.
pub fn scan_density_drop(trace: &DensityTrace, t: f64) -> Option<f64> {
    let start = trace.row_at(t)?;
    let target = start.r - start.p / 4.0;
    trace.rows.iter().filter(|row| row.t >= t).find(|row| row.r <= target).map(|row| row.t)
}
