//! One-dimensional fiber operators: the valley fiber `H^(eps)`, its scaled form
//! `H_u`, and the shifted transverse oscillator.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigensolve::{count_negative, lowest_eigenpairs};
use crate::error::{invalid, Error, Result};
use crate::geometry::{profile_c1, DEFAULT_KAPPA};
use crate::operators::{GridLayout, OperatorKind, OperatorMeta, SparseHermitianOperator};
use crate::quadrature::{integrate, Tolerance};

/// Default spacing bound of fiber grids.
pub const H_MAX: f64 = 0.02;

/// Symmetric Dirichlet grid on `[-T, T]` with `n` interior points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberGrid {
    pub half_width: f64,
    pub n: usize,
}

impl FiberGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || n < 3 {
            return Err(invalid("grid", format!("T = {half_width}, n = {n}")));
        }
        Ok(Self { half_width, n })
    }

    /// `T = max(12, 6 eps^(-1/4))` and the coarsest `n` with spacing `<= h_max`.
    pub fn for_epsilon(epsilon: f64, h_max: f64) -> Result<Self> {
        let t = if epsilon > 0.0 { 12f64.max(6.0 * epsilon.powf(-0.25)) } else { 12.0 };
        Self::with_spacing(t, h_max)
    }

    pub fn with_spacing(half_width: f64, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) {
            return Err(invalid("h_max", "must be positive"));
        }
        let cells = (2.0 * half_width / h_max).ceil() as usize;
        Self::new(half_width, cells.max(4) - 1)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n + 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.h()
    }

    /// Same interval, spacing halved; nodes of `self` are nodes of the result.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            n: 2 * self.n + 1,
        }
    }
}

/// `t^2 / (2 sqrt(1 + eps t^2)) - 1 / (sqrt(2) (1 + eps t^2)^(1/4))`.
pub fn fiber_potential(epsilon: f64, t: f64) -> f64 {
    let s = 1.0 + epsilon * t * t;
    0.5 * t * t / s.sqrt() - 1.0 / (SQRT_2 * s.powf(0.25))
}

/// 3-point `-d^2 + V` on a grid as a sparse operator.
pub(crate) fn tridiagonal_operator(grid: &FiberGrid, v: impl Fn(f64) -> f64, kind: OperatorKind) -> SparseHermitianOperator {
    let (diag, off) = tridiagonal(grid, v);
    let n = grid.n;
    let mut up = Vec::with_capacity(2 * n);
    for i in 0..n {
        up.push((i, i, num_complex::Complex64::new(diag[i], 0.0)));
        if i + 1 < n {
            up.push((i, i + 1, num_complex::Complex64::new(off, 0.0)));
        }
    }
    let meta = OperatorMeta {
        kind,
        grid: None,
        spec: None,
        potential: None,
        layout: Some(GridLayout {
            nx: n,
            ny: 1,
            components: 1,
            reach: 1,
        }),
    };
    SparseHermitianOperator::from_upper_triplets(n, &up, meta).expect("tridiagonal assembly is Hermitian")
}

fn tridiagonal(grid: &FiberGrid, v: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
    let h2 = grid.h() * grid.h();
    let diag = (0..grid.n).map(|i| 2.0 / h2 + v(grid.t(i))).collect();
    (diag, -1.0 / h2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberProblem {
    pub epsilon: f64,
    pub grid: FiberGrid,
    pub operator: SparseHermitianOperator,
}

pub fn assemble_fiber(epsilon: f64, grid: FiberGrid) -> Result<FiberProblem> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", format!("{epsilon} must be >= 0")));
    }
    let operator = tridiagonal_operator(&grid, |t| fiber_potential(epsilon, t), OperatorKind::Fiber);
    Ok(FiberProblem { epsilon, grid, operator })
}

/// Fiber problem on the default grid for `eps`.
pub fn default_fiber(epsilon: f64) -> Result<FiberProblem> {
    assemble_fiber(epsilon, FiberGrid::for_epsilon(epsilon, H_MAX)?)
}

const EIG_TOL: f64 = 1e-10;

fn lowest(p: &FiberProblem, k: usize) -> Result<Vec<f64>> {
    Ok(lowest_eigenpairs(&p.operator, k, EIG_TOL)?.eigenvalues)
}

/// A two-grid value with Richardson extrapolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    /// Extrapolated value `fine + (fine - coarse) / 3`.
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    /// `max(1e-6, 3 * |value - fine|)`.
    pub tol_disc: f64,
}

impl Refined {
    fn from_pair(coarse: f64, fine: f64) -> Result<Self> {
        let d = fine - coarse;
        if !(d.abs() <= 1e-2 * fine.abs().max(1.0)) {
            return Err(Error::RefinementUnstable { coarse, fine });
        }
        let value = fine + d / 3.0;
        Ok(Self {
            value,
            coarse,
            fine,
            tol_disc: 1e-6f64.max(3.0 * (value - fine).abs()),
        })
    }
}

fn refined_pair(p: &FiberProblem, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let fine = assemble_fiber(p.epsilon, p.grid.refined())?;
    Ok((lowest(p, k)?, lowest(&fine, k)?))
}

/// Lowest eigenvalue, extrapolated from the grid of `p` and its refinement.
pub fn ground_energy(p: &FiberProblem) -> Result<Refined> {
    let (c, f) = refined_pair(p, 1)?;
    Refined::from_pair(c[0], f[0])
}

/// Second minus first eigenvalue, extrapolated the same way.
pub fn excitation_gap(p: &FiberProblem) -> Result<Refined> {
    let (c, f) = refined_pair(p, 2)?;
    Refined::from_pair(c[1] - c[0], f[1] - f[0])
}

/// `phi_0(t) = (sqrt(2) pi)^(-1/4) exp(-t^2 / (2 sqrt 2))`.
pub fn phi0(t: f64) -> f64 {
    (SQRT_2 * PI).powf(-0.25) * (-t * t / (2.0 * SQRT_2)).exp()
}

/// Continuum `<phi_0, H^(eps) phi_0>` by quadrature.
pub fn projected_energy(epsilon: f64) -> Result<f64> {
    let dphi = |t: f64| -t / SQRT_2 * phi0(t);
    let e = integrate(
        |t| dphi(t).powi(2) + fiber_potential(epsilon, t) * phi0(t).powi(2),
        -14.0,
        14.0,
        Tolerance::new(1e-15, 1e-13),
    )?;
    Ok(e.value)
}

/// `P v = phi <phi, v>` with `phi` the sampled, normalized `phi_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundProjector {
    pub phi: Vec<f64>,
}

impl GroundProjector {
    pub fn new(grid: &FiberGrid) -> Self {
        let mut phi: Vec<f64> = (0..grid.n).map(|i| phi0(grid.t(i))).collect();
        let nrm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|x| *x /= nrm);
        Self { phi }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let c: f64 = self.phi.iter().zip(v).map(|(a, b)| a * b).sum();
        self.phi.iter().map(|p| p * c).collect()
    }
}

/// Sturm count of eigenvalues `< 0` of the symmetric tridiagonal `(d, e)`,
/// with `u^T T^-1 u` from the same factorization. `None` on a zero pivot.
fn tridiagonal_inertia(d: &[f64], e: f64, u: &[f64]) -> Option<(usize, f64)> {
    let n = d.len();
    let mut piv = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut neg = 0;
    let scale = d.iter().fold(e.abs(), |a, &x| a.max(x.abs()));
    for i in 0..n {
        let p = if i == 0 { d[0] } else { d[i] - l[i] * e };
        if !(p.abs() > 1e-14 * scale) {
            return None;
        }
        piv[i] = p;
        if p < 0.0 {
            neg += 1;
        }
        if i + 1 < n {
            l[i + 1] = e / p;
        }
    }
    // solve L D L^T x = u, accumulate u . x
    let mut z = u.to_vec();
    for i in 1..n {
        z[i] -= l[i] * z[i - 1];
    }
    let q: f64 = z.iter().zip(&piv).map(|(zi, p)| zi * zi / p).sum();
    Some((neg, q))
}

/// Number of eigenvalues `< 0` of `T + s u u^T` via the bordered-matrix
/// identity `N(T + s uu^T) = N(T) + N(-1/s - u^T T^-1 u) - N(-1/s)`.
fn rank_one_count(d: &[f64], e: f64, s: f64, u: &[f64]) -> Option<usize> {
    let (nt, q) = tridiagonal_inertia(d, e, u)?;
    if s == 0.0 {
        return Some(nt);
    }
    let neg = |x: f64| usize::from(x < 0.0);
    Some(nt + neg(-1.0 / s - q) - neg(-1.0 / s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorCheck {
    pub holds: bool,
    pub tol_disc: f64,
}

/// Whether `H^(eps) - a P_0 - c (1 - P_0) >= -tol_disc`.
///
/// The check runs on the refined grid of `p`, the one whose discretization
/// error `tol_disc` bounds.
pub fn projector_bound_check(p: &FiberProblem, a: f64, c: f64) -> Result<ProjectorCheck> {
    let tol_disc = ground_energy(p)?.tol_disc;
    let fine = assemble_fiber(p.epsilon, p.grid.refined())?;
    let holds = projector_bound_holds(&fine, a, c, tol_disc)?;
    Ok(ProjectorCheck { holds, tol_disc })
}

/// `K = (H - c) + (c - a) P_0`; the bound holds iff `K + tol` has no negative eigenvalue.
pub fn projector_bound_holds(p: &FiberProblem, a: f64, c: f64, tol: f64) -> Result<bool> {
    let (d, e) = tridiagonal(&p.grid, |t| fiber_potential(p.epsilon, t));
    let proj = GroundProjector::new(&p.grid);
    let mut shift = c - tol;
    for attempt in 0..3 {
        let dd: Vec<f64> = d.iter().map(|x| x - shift).collect();
        if let Some(n) = rank_one_count(&dd, e, c - a, &proj.phi) {
            return Ok(n == 0);
        }
        // singular: nudge the shift by a relative 1e-12 and retry
        shift -= 1e-12 * (1.0 + shift.abs()) * (attempt + 1) as f64;
    }
    Err(Error::Singular { shift: c - tol, attempts: 3 })
}

/// Largest `c` in `[0, c_max]` for which the projector bound holds (bisection).
pub fn max_admissible_c(p: &FiberProblem, a: f64, c_max: f64) -> Result<f64> {
    let tol = ground_energy(p)?.tol_disc;
    let p = &assemble_fiber(p.epsilon, p.grid.refined())?;
    if !projector_bound_holds(p, a, 0.0, tol)? {
        return Ok(f64::NAN);
    }
    if projector_bound_holds(p, a, c_max, tol)? {
        return Ok(c_max);
    }
    let (mut lo, mut hi) = (0.0, c_max);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if projector_bound_holds(p, a, mid, tol)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `H_u = -d_v^2 + v^2 / (2 sqrt(u^2 + v^2)) - 1 / (sqrt(2) (u^2 + v^2)^(1/4))`.
pub fn valley_potential(u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    0.5 * v * v / r2.sqrt() - 1.0 / (SQRT_2 * r2.powf(0.25))
}

/// Grid for `H_u`: the default `eps = u^(-3/2)` grid stretched by `u^(1/4)`.
pub fn valley_grid(u: f64, h_max: f64) -> Result<FiberGrid> {
    let s = u.powf(0.25);
    let g = FiberGrid::for_epsilon(u.powf(-1.5), h_max)?;
    FiberGrid::with_spacing(g.half_width * s, h_max * s)
}

pub fn assemble_valley_fiber(u: f64, grid: &FiberGrid) -> Result<SparseHermitianOperator> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(invalid("u", format!("{u} must be positive")));
    }
    Ok(tridiagonal_operator(grid, |v| valley_potential(u, v), OperatorKind::Fiber))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValleyFiberCount {
    pub u: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// Negative eigenvalues of `H_u - lambda u^(-1 - alpha/2)` on the grid.
    pub count: usize,
    /// `(c1 + c2 + lambda)^(2/3)`.
    pub m0: f64,
    /// `u >= m0`, where at most one negative eigenvalue is expected.
    pub beyond_m0: bool,
}

pub fn valley_fiber_counts(u: f64, lambda: f64, alpha: f64, delta: f64) -> Result<ValleyFiberCount> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} must lie in (0, 1)")));
    }
    let grid = valley_grid(u, H_MAX)?;
    let op = assemble_valley_fiber(u, &grid)?;
    let shift = lambda * u.powf(-1.0 - 0.5 * alpha);
    let count = count_negative(&op, shift)?.n_negative;
    let c1 = profile_c1(DEFAULT_KAPPA)?;
    let c2 = (1.0 - delta).powi(-2);
    let m0 = (c1 + c2 + lambda).powf(2.0 / 3.0);
    Ok(ValleyFiberCount {
        u,
        lambda,
        alpha,
        count,
        m0,
        beyond_m0: u >= m0,
    })
}

/// `2 k x - lambda x^(-alpha)` for `k = 0..=k_max`.
pub fn shifted_oscillator_levels(x: f64, lambda: f64, alpha: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid("x", format!("{x} must be positive")));
    }
    let s = lambda * x.powf(-alpha);
    Ok((0..=k_max).map(|k| 2.0 * k as f64 * x - s).collect())
}

/// Number of negative levels, `ceil(lambda x^(-alpha) / (2x))`.
pub fn negative_level_count(x: f64, lambda: f64, alpha: f64) -> usize {
    let s = lambda * x.powf(-alpha);
    if s <= 0.0 {
        0
    } else {
        (s / (2.0 * x)).ceil() as usize
    }
}

/// `-d_y^2 + x^2 y^2 - x - lambda x^(-alpha)` on `[-w, w]`.
pub fn transverse_oscillator(x: f64, lambda: f64, alpha: f64, grid: &FiberGrid) -> Result<SparseHermitianOperator> {
    if !(x > 0.0) {
        return Err(invalid("x", format!("{x} must be positive")));
    }
    let s = lambda * x.powf(-alpha);
    Ok(tridiagonal_operator(grid, |y| x * x * y * y - x - s, OperatorKind::Fiber))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberRow {
    pub epsilon: f64,
    pub ground: f64,
    pub gap: f64,
    pub bound_ok: bool,
}

/// Ground energy, gap and the projector bound with `a = -eps/4 - 0.05 eps`, `c = 0.5`.
pub fn fiber_sweep(epsilons: &[f64], h_max: f64) -> Result<Vec<FiberRow>> {
    epsilons
        .iter()
        .map(|&eps| {
            let p = assemble_fiber(eps, FiberGrid::for_epsilon(eps, h_max)?)?;
            let ground = ground_energy(&p)?;
            let gap = excitation_gap(&p)?;
            let a = -0.25 * eps - 0.05 * eps;
            let bound_ok = projector_bound_check(&p, a, 0.5)?.holds;
            Ok(FiberRow {
                epsilon: eps,
                ground: ground.value,
                gap: gap.value,
                bound_ok,
            })
        })
        .collect()
}

pub fn write_fiber_csv<W: Write>(rows: &[FiberRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
