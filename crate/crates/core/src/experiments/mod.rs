//! Counting experiments, fits and the sweep harness.

pub mod config;
pub mod fit;
pub mod plan;
pub mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{count_negative, lowest_eigenpairs};
use crate::error::{invalid, Result};
use crate::operators::{assemble_hamiltonian_with, assemble_shifted_with, Box2D, PotentialRule, WeightSpec};

pub use fit::{fit_growth, fit_model, FitModel, FitResult, FitWindow};

/// Allowed change of `N_L` between the two largest boxes on the discrete side.
pub const SATURATION_SLACK: usize = 1;
/// Largest count below which a growth fit is flagged as underpowered.
pub const UNDERPOWERED_BELOW: usize = 30;

/// Grid settings shared by the counting experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingGrid {
    pub h: f64,
    pub potential: PotentialRule,
}

impl Default for CountingGrid {
    fn default() -> Self {
        Self {
            h: 0.1,
            potential: PotentialRule::ValleyAdapted,
        }
    }
}

/// `N(H - lambda rho)` on the box `[-L, L]^2`.
pub fn shifted_count(alpha: f64, lambda: f64, half_width: f64, grid: CountingGrid) -> Result<usize> {
    let b = Box2D::with_spacing(half_width, grid.h)?;
    let op = assemble_shifted_with(&b, &WeightSpec::new(alpha, lambda)?, grid.potential, true)?;
    Ok(count_negative(&op, 0.0)?.n_negative)
}

/// `N(H_B - lambda)` on the box `[-L, L]^2`.
pub fn bosonic_count(lambda: f64, half_width: f64, grid: CountingGrid) -> Result<usize> {
    let b = Box2D::with_spacing(half_width, grid.h)?;
    let op = assemble_hamiltonian_with(&b, false, grid.potential)?;
    Ok(count_negative(&op, lambda)?.n_negative)
}

fn strictly_increasing(name: &'static str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(invalid(name, "grid is empty"));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
        return Err(invalid(name, "grid must be finite and strictly increasing"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionClass {
    /// Last two boxes agree within the slack.
    Saturating,
    Growing,
    /// Some cell failed or fewer than two boxes.
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub alpha: f64,
    pub lambda: f64,
    pub half_widths: Vec<f64>,
    /// `None` where the cell failed.
    pub counts: Vec<Option<usize>>,
    pub errors: Vec<Option<String>>,
    pub class: TransitionClass,
    /// Counts are strictly increasing in `L` (all cells present).
    pub strictly_increasing: bool,
}

pub fn classify_transition(counts: &[Option<usize>]) -> (TransitionClass, bool) {
    let all: Option<Vec<usize>> = counts.iter().copied().collect();
    match all {
        Some(c) if c.len() >= 2 => {
            let inc = c.windows(2).all(|w| w[1] > w[0]);
            let (a, b) = (c[c.len() - 2], c[c.len() - 1]);
            let class = if a.abs_diff(b) <= SATURATION_SLACK {
                TransitionClass::Saturating
            } else {
                TransitionClass::Growing
            };
            (class, inc)
        }
        _ => (TransitionClass::Incomplete, false),
    }
}

/// `N_L(H - lambda rho)` over boxes for each `alpha`; failed cells are kept as
/// errors in the row.
pub fn transition_experiment(
    alphas: &[f64],
    lambda: f64,
    half_widths: &[f64],
    grid: CountingGrid,
) -> Result<Vec<TransitionRow>> {
    strictly_increasing("boxes", half_widths)?;
    let cells: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|a| (0..half_widths.len()).map(move |l| (a, l)))
        .collect();
    let results: Vec<Result<usize>> = cells
        .par_iter()
        .map(|&(a, l)| shifted_count(alphas[a], lambda, half_widths[l], grid))
        .collect();
    let mut rows = Vec::with_capacity(alphas.len());
    for (a, &alpha) in alphas.iter().enumerate() {
        let slice = &results[a * half_widths.len()..(a + 1) * half_widths.len()];
        let counts: Vec<Option<usize>> = slice.iter().map(|r| r.as_ref().ok().copied()).collect();
        let errors = slice.iter().map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
        let (class, strictly_increasing) = classify_transition(&counts);
        rows.push(TransitionRow {
            alpha,
            lambda,
            half_widths: half_widths.to_vec(),
            counts,
            errors,
            class,
            strictly_increasing,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthResult {
    pub alpha: f64,
    pub half_width: f64,
    /// `(lambda, N)` for every sampled shift.
    pub counts: Vec<(f64, usize)>,
    /// Power-law fit over the points with `N > 0`.
    pub fit: FitResult,
    /// `max N < 30`: too little dynamic range for the exponent to mean much.
    pub underpowered: bool,
}

/// Growth exponent of `N(H_lambda)` in `lambda` at fixed box.
pub fn growth_experiment(alpha: f64, lambdas: &[f64], half_width: f64, grid: CountingGrid) -> Result<GrowthResult> {
    if !(alpha > 2.0) {
        return Err(invalid("alpha", format!("{alpha} must exceed 2")));
    }
    strictly_increasing("lambdas", lambdas)?;
    let counts: Vec<usize> = lambdas
        .par_iter()
        .map(|&l| shifted_count(alpha, l, half_width, grid))
        .collect::<Result<_>>()?;
    finish_growth(alpha, half_width, lambdas, &counts)
}

pub(crate) fn finish_growth(alpha: f64, half_width: f64, lambdas: &[f64], counts: &[usize]) -> Result<GrowthResult> {
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(counts)
        .filter(|(_, &n)| n > 0)
        .map(|(&l, &n)| (l, n as f64))
        .collect();
    let fit = fit_growth(&pts, FitModel::Power)?;
    let max_n = counts.iter().copied().max().unwrap_or(0);
    Ok(GrowthResult {
        alpha,
        half_width,
        counts: lambdas.iter().copied().zip(counts.iter().copied()).collect(),
        fit,
        underpowered: max_n < UNDERPOWERED_BELOW,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BosonicResult {
    pub half_width: f64,
    pub counts: Vec<(f64, usize)>,
    pub power_fit: FitResult,
    /// `N = c lambda^p ln lambda`.
    pub power_log_fit: FitResult,
    /// Fraction of the ground state's mass inside `[-L/2, L/2]^2`.
    pub ground_mass_inside: f64,
    /// The shift window was shrunk because the diagnostic failed.
    pub window_shrunk: bool,
}

/// Required ground-state mass inside the half box.
pub const GROUND_MASS_MIN: f64 = 0.999;

/// Mass of the lowest eigenvector of `H_B` inside `[-L/2, L/2]^2`, computed
/// on a grid no finer than 0.2.
pub fn bosonic_ground_mass(half_width: f64, grid: CountingGrid) -> Result<f64> {
    let b = Box2D::with_spacing(half_width, grid.h.max(0.2))?;
    let op = assemble_hamiltonian_with(&b, false, grid.potential)?;
    let sp = lowest_eigenpairs(&op, 1, 1e-8)?;
    let v = &sp.eigenvectors[0];
    let (mut inside, mut total) = (0.0, 0.0);
    for i in 0..b.interior_x() {
        for j in 0..b.interior_y() {
            let m = v[b.node(i, j)].norm_sqr();
            total += m;
            if b.x(i).abs() <= 0.5 * half_width && b.y(j).abs() <= 0.5 * half_width {
                inside += m;
            }
        }
    }
    Ok(inside / total)
}

/// `N(H_B - lambda)` over `lambdas` with power and power-log fits.
///
/// If the ground-state diagnostic fails, the upper half of the shift window is
/// dropped (keeping at least five points) and the result says so.
pub fn bosonic_experiment(lambdas: &[f64], half_width: f64, grid: CountingGrid) -> Result<BosonicResult> {
    strictly_increasing("lambdas", lambdas)?;
    let mass = bosonic_ground_mass(half_width, grid)?;
    let mut window = lambdas.to_vec();
    let shrunk = mass < GROUND_MASS_MIN && lambdas.len() > fit::MIN_POINTS;
    if shrunk {
        window.truncate((lambdas.len() / 2).max(fit::MIN_POINTS));
    }
    let counts: Vec<usize> = window
        .par_iter()
        .map(|&l| bosonic_count(l, half_width, grid))
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = window
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(&l, &n)| (l, n as f64))
        .collect();
    Ok(BosonicResult {
        half_width,
        counts: window.iter().copied().zip(counts.iter().copied()).collect(),
        power_fit: fit_growth(&pts, FitModel::Power)?,
        power_log_fit: fit_growth(&pts, FitModel::PowerLog)?,
        ground_mass_inside: mass,
        window_shrunk: shrunk,
    })
}

/// `lo * (hi/lo)^(k/(n-1))`, `k = 0..n`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(invalid("grid", format!("geometric grid needs 0 < lo < hi and n >= 2 ({lo}, {hi}, {n})")));
    }
    Ok((0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(classify_transition(&[Some(2), Some(2), Some(3)]).0, TransitionClass::Saturating);
        let (c, inc) = classify_transition(&[Some(6), Some(8), Some(14)]);
        assert_eq!(c, TransitionClass::Growing);
        assert!(inc);
        assert_eq!(classify_transition(&[Some(1), None]).0, TransitionClass::Incomplete);
    }

    #[test]
    fn geometric() {
        let g = geometric_grid(2.0, 64.0, 6).unwrap();
        assert!((g[5] - 64.0).abs() < 1e-12 && (g[1] - 4.0).abs() < 1e-12);
    }
}
