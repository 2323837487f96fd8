//! Least-squares growth fits in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `N = c x^p`.
    Power,
    /// `N = c x^p ln x`.
    PowerLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub exponent: f64,
    /// Power of `ln x` in the model (0 or 1).
    pub log_power: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: FitWindow,
}

pub const MIN_POINTS: usize = 5;

/// Fit of a counting function: at least five points with `N > 0`, increasing
/// overall.
pub fn fit_growth(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    if points.len() < MIN_POINTS {
        return Err(Error::DegenerateFit(format!(
            "need at least {MIN_POINTS} points, got {}",
            points.len()
        )));
    }
    let (first, last) = (points[0].1, points[points.len() - 1].1);
    if !(last > first) {
        return Err(Error::DegenerateFit(format!("counts do not increase ({first} -> {last})")));
    }
    fit_model(points, model)
}

/// Log-space least squares without the counting preconditions (any sign of
/// the exponent, at least two points).
pub fn fit_model(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    let log_power = match model {
        FitModel::Power => 0.0,
        FitModel::PowerLog => 1.0,
    };
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, n) in points {
        let lx = if log_power > 0.0 { x.ln() } else { 1.0 };
        if !(x > 0.0 && n > 0.0 && lx > 0.0 && x.is_finite() && n.is_finite()) {
            return Err(Error::DegenerateFit(format!("point ({x}, {n}) outside the model domain")));
        }
        xs.push(x.ln());
        ys.push(n.ln() - lx.ln());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if xs.len() < 2 || !(sxx > 1e-14 * (1.0 + mx * mx)) {
        return Err(Error::DegenerateFit("abscissae do not span a window".into()));
    }
    let p = sxy / sxx;
    let c = my - p * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c - p * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let (x_min, x_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(x, _)| (a.min(x), b.max(x)));
    Ok(FitResult {
        model,
        exponent: p,
        log_power,
        prefactor: c.exp(),
        r_squared,
        window: FitWindow {
            x_min,
            x_max,
            points: points.len(),
        },
    })
}
