//! Low-lying spectra and exact negative-eigenvalue counts.

mod band;
mod dense;
mod frontal;
mod lanczos;
mod multifrontal;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operators::{Box2D, OperatorKind, PotentialRule, SparseHermitianOperator, WeightSpec};
use multifrontal::RealSym;

pub const DEFAULT_DENSE_CAP: usize = 4000;
/// Seed of the starting vector of the iterative solver.
pub const START_SEED: u64 = 0x5eed_1ac0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    Iterative,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub solver: SolverTag,
    pub iterations: usize,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Inertia,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub n_negative: usize,
    /// Eigenvalues strictly below this value are counted.
    pub shift: f64,
    pub method: CountMethod,
    /// Shift actually used after a pivot breakdown; equals `shift` otherwise.
    pub effective_shift: f64,
    pub dimension: usize,
    pub kind: OperatorKind,
    #[serde(rename = "box")]
    pub grid: Option<Box2D>,
    pub spec: Option<WeightSpec>,
    pub potential: Option<PotentialRule>,
}

impl CountResult {
    fn new(op: &SparseHermitianOperator, n: usize, shift: f64, eff: f64, method: CountMethod) -> Self {
        let m = op.meta();
        Self {
            n_negative: n,
            shift,
            method,
            effective_shift: eff,
            dimension: op.dimension(),
            kind: m.kind,
            grid: m.grid,
            spec: m.spec,
            potential: m.potential,
        }
    }

    pub fn perturbed(&self) -> bool {
        self.effective_shift != self.shift
    }
}

/// Relative pivot size below which the factorization is declared singular.
const BREAKDOWN: f64 = 1e-13;
/// Shift perturbation on breakdown, relative to `||op||_inf`.
pub const ETA: f64 = 1e-8;

/// Exact number of eigenvalues `< shift` by Sylvester inertia of a multifrontal
/// `LDL^T` factorization of `op - shift I`.
///
/// If a pivot falls below `1e-13 ||op - shift||_inf` the count is retried at
/// `shift + eta` and then `shift - eta`, with `eta = 1e-8 ||op||_inf`; the shift
/// actually used is reported in `effective_shift`.
pub fn count_negative(op: &SparseHermitianOperator, shift: f64) -> Result<CountResult> {
    if !shift.is_finite() {
        return Err(invalid("shift", "must be finite"));
    }
    let (sym, complex) = RealSym::from_operator(op);
    let layout = op.layout().map(|l| {
        if complex {
            crate::operators::GridLayout {
                components: 2 * l.components,
                ..l
            }
        } else {
            l
        }
    });
    let norm = sym.norm_inf();
    let eta = ETA * norm.max(f64::MIN_POSITIVE);
    for s in [shift, shift + eta, shift - eta] {
        let tiny = BREAKDOWN * (norm + s.abs()).max(f64::MIN_POSITIVE);
        if let Ok(neg) = multifrontal::count_below(&sym, layout, s, tiny) {
            let n = if complex { neg / 2 } else { neg };
            return Ok(CountResult::new(op, n, shift, s, CountMethod::Inertia));
        }
    }
    Err(Error::Singular { shift, attempts: 2 })
}

/// Count of eigenvalues `< shift` from the dense spectrum (oracle).
pub fn count_negative_dense(op: &SparseHermitianOperator, shift: f64, cap: usize) -> Result<CountResult> {
    let ev = dense_eigenvalues(op, cap)?;
    let n = ev.iter().filter(|&&l| l < shift).count();
    Ok(CountResult::new(op, n, shift, shift, CountMethod::Dense))
}

fn check_cap(op: &SparseHermitianOperator, cap: usize) -> Result<()> {
    if op.dimension() > cap {
        return Err(Error::DimensionTooLarge {
            dimension: op.dimension(),
            cap,
        });
    }
    Ok(())
}

/// All eigenvalues, ascending.
pub fn dense_eigenvalues(op: &SparseHermitianOperator, cap: usize) -> Result<Vec<f64>> {
    check_cap(op, cap)?;
    Ok(dense::eigh(op, false).0)
}

/// Full spectrum with eigenvectors and residuals, dimension capped at 4000.
pub fn dense_spectrum(op: &SparseHermitianOperator) -> Result<SpectralResult> {
    dense_spectrum_capped(op, DEFAULT_DENSE_CAP)
}

pub fn dense_spectrum_capped(op: &SparseHermitianOperator, cap: usize) -> Result<SpectralResult> {
    check_cap(op, cap)?;
    let (eigenvalues, eigenvectors) = dense::eigh(op, true);
    let residual_norms = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&l, v)| residual(op, l, v))
        .collect();
    Ok(SpectralResult {
        eigenvalues,
        residual_norms,
        solver: SolverTag::Dense,
        iterations: 1,
        eigenvectors,
    })
}

fn residual(op: &SparseHermitianOperator, lambda: f64, v: &[Complex64]) -> f64 {
    let av = op.mul_vec(v);
    let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    av.iter()
        .zip(v)
        .map(|(a, x)| (a - x * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / nv
}

/// Iteration budget for [`lowest_eigenpairs_with`].
#[derive(Clone, Copy, Debug)]
pub struct IterativeOptions {
    pub basis: usize,
    pub max_applies: usize,
    pub seed: u64,
    /// Largest `n * bandwidth^2` for which shift-invert with a banded factor is used.
    pub band_work_limit: f64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            basis: 0,
            max_applies: 20_000,
            seed: START_SEED,
            band_work_limit: 4e9,
        }
    }
}

/// The `k` smallest eigenpairs with residual `||A v - l v|| <= tol`.
pub fn lowest_eigenpairs(op: &SparseHermitianOperator, k: usize, tol: f64) -> Result<SpectralResult> {
    lowest_eigenpairs_with(op, k, tol, &IterativeOptions::default())
}

pub fn lowest_eigenpairs_with(
    op: &SparseHermitianOperator,
    k: usize,
    tol: f64,
    opts: &IterativeOptions,
) -> Result<SpectralResult> {
    let n = op.dimension();
    if k == 0 || k >= n {
        return Err(invalid("k", format!("need 1 <= k < dimension ({n}), got {k}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let basis = if opts.basis > 0 { opts.basis } else { (2 * k + 20).max(40) };
    let b = op.bandwidth() as f64;
    let mut factor = None;
    let mut sigma = 0.0;
    if (n as f64) * b * b <= opts.band_work_limit {
        let g = op.gershgorin_lower();
        sigma = g - 1e-3 * g.abs().max(1.0);
        factor = band::BandFactor::factor_positive(op, sigma);
    }
    let res_fn = |lambda: f64, y: &[Complex64]| residual(op, lambda, y);
    let out = match &factor {
        Some(f) => {
            let p = lanczos::KrylovParams {
                n,
                nev: k,
                basis,
                max_applies: opts.max_applies,
                want_largest: true,
                seed: opts.seed,
            };
            lanczos::thick_restart(
                &p,
                tol,
                |x, y| f.solve(x, y),
                |theta, y| {
                    let l = sigma + 1.0 / theta;
                    (l, res_fn(l, y))
                },
            )
        }
        None => {
            let p = lanczos::KrylovParams {
                n,
                nev: k,
                basis: basis.max(120),
                max_applies: opts.max_applies,
                want_largest: false,
                seed: opts.seed,
            };
            lanczos::thick_restart(&p, tol, |x, y| op.apply(x, y), |theta, y| {
                // refine with the exact Rayleigh quotient
                let l = rayleigh(op, y).unwrap_or(theta);
                (l, res_fn(l, y))
            })
        }
    };
    if !out.converged {
        return Err(Error::NotConverged {
            iterations: out.iterations,
            best_residuals: out.residuals,
        });
    }
    let mut idx: Vec<usize> = (0..out.values.len()).collect();
    idx.sort_by(|&a, &b| out.values[a].total_cmp(&out.values[b]));
    Ok(SpectralResult {
        eigenvalues: idx.iter().map(|&i| out.values[i]).collect(),
        residual_norms: idx.iter().map(|&i| out.residuals[i]).collect(),
        solver: SolverTag::Iterative,
        iterations: out.iterations,
        eigenvectors: idx.iter().map(|&i| out.vectors[i].clone()).collect(),
    })
}

fn rayleigh(op: &SparseHermitianOperator, y: &[Complex64]) -> Option<f64> {
    let nn: f64 = y.iter().map(|x| x.norm_sqr()).sum();
    (nn > 0.0).then(|| op.quadratic_form(y) / nn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorMeta;

    fn diag(d: &[f64]) -> SparseHermitianOperator {
        SparseHermitianOperator::from_real_diagonal(d, OperatorMeta::custom())
    }

    #[test]
    fn diagonal_counts() {
        let op = diag(&[-2.0, -1.0, 5.0]);
        assert_eq!(count_negative(&op, 0.0).unwrap().n_negative, 2);
        assert_eq!(count_negative(&op, 6.0).unwrap().n_negative, 3);
        let d = dense_spectrum(&diag(&[-1.0, 3.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![-1.0, 3.0]);
    }

    #[test]
    fn singular_shift_is_perturbed() {
        let op = diag(&[-1.0, 0.0, 2.0]);
        let c = count_negative(&op, 0.0).unwrap();
        assert!(c.perturbed());
        assert!(c.n_negative == 1 || c.n_negative == 2);
    }

    #[test]
    fn dense_cap_enforced() {
        let op = diag(&[1.0; 10]);
        assert!(matches!(
            dense_spectrum_capped(&op, 5),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
