//! Counting bounds for operator-valued potentials and the two reductions
//! (radial lift, logarithmic substitution) behind them.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{partition, RegionSpec};
use crate::quadrature::{integrate, integrate_2d, integrate_to_infinity, Tolerance};

/// Quadrature targets for every bound integral.
pub const QUAD_TOL: Tolerance = Tolerance { abs: 1e-10, rel: 1e-8 };

type LevelFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// `x -> eigenvalues of V(x)`, truncated to the levels that can be negative.
///
/// The fiber basis is taken to be independent of `x`, so level `k` is a scalar
/// potential in its own right; this is the case for every potential built here.
#[derive(Clone)]
pub struct FiberedPotential {
    pub lo: f64,
    /// May be `f64::INFINITY`.
    pub hi: f64,
    /// Largest number of levels returned at any point.
    pub rank: usize,
    levels: Arc<LevelFn>,
}

impl fmt::Debug for FiberedPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberedPotential")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("rank", &self.rank)
            .finish_non_exhaustive()
    }
}

impl FiberedPotential {
    pub fn new(lo: f64, hi: f64, rank: usize, levels: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Result<Self> {
        if !(lo.is_finite() && hi > lo) {
            return Err(invalid("domain", format!("({lo}, {hi})")));
        }
        Ok(Self {
            lo,
            hi,
            rank,
            levels: Arc::new(levels),
        })
    }

    /// A single scalar level.
    pub fn scalar(lo: f64, hi: f64, v: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new(lo, hi, 1, move |x| vec![v(x)])
    }

    pub fn zero(lo: f64, hi: f64) -> Result<Self> {
        Self::scalar(lo, hi, |_| 0.0)
    }

    /// Levels `2kx - lambda x^(-alpha)` up to the first positive one, which is
    /// exact for `|V_-|^p` traces because the levels increase in `k`.
    pub fn shifted_oscillator(lambda: f64, alpha: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) {
            return Err(invalid("domain", "oscillator fibers need x > 0"));
        }
        let rank = crate::fiber::negative_level_count(lo, lambda, alpha) + 1;
        Self::new(lo, hi, rank, move |x| {
            let k_max = crate::fiber::negative_level_count(x, lambda, alpha);
            crate::fiber::shifted_oscillator_levels(x, lambda, alpha, k_max).unwrap_or_default()
        })
    }

    pub fn levels(&self, x: f64) -> Vec<f64> {
        let mut l = (self.levels)(x);
        l.sort_by(f64::total_cmp);
        l
    }

    /// Level `k` at `x`, `0` if the truncation dropped it (dropped levels are positive).
    fn level(&self, k: usize, x: f64) -> f64 {
        self.levels(x).get(k).copied().unwrap_or(0.0)
    }
}

/// `sum |min(l, 0)|^p`.
pub fn negative_trace_power(levels: &[f64], p: f64) -> f64 {
    levels.iter().filter(|&&l| l < 0.0).map(|l| (-l).powf(p)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c3: f64,
    pub c_q: f64,
    pub q: f64,
}

impl BoundConstants {
    pub fn new(c3: f64, c_q: f64, q: f64) -> Result<Self> {
        let b = Self { c3, c_q, q };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c3 > 0.0 && self.c_q > 0.0) {
            return Err(invalid("constants", "C3 and C_q must be positive"));
        }
        if !(self.q > 1.0) {
            return Err(invalid("q", format!("{} must exceed 1", self.q)));
        }
        Ok(())
    }
}

impl Default for BoundConstants {
    /// `C3` is Lieb's three-dimensional constant; `C_q = 1` is a placeholder.
    fn default() -> Self {
        Self { c3: 0.1156, c_q: 1.0, q: 1.5 }
    }
}

fn weighted_integral(pot: &FiberedPotential, w: impl Fn(f64) -> f64) -> Result<f64> {
    let f = |x: f64| negative_trace_power(&pot.levels(x), 1.5) * w(x);
    let est = if pot.hi.is_finite() {
        integrate(f, pot.lo, pot.hi, QUAD_TOL)?
    } else {
        integrate_to_infinity(f, pot.lo, QUAD_TOL)?
    };
    Ok(est.value)
}

/// `4 pi C3 int tr|V_-|^(3/2) x^2 dx`.
pub fn clr_halfline(pot: &FiberedPotential, consts: &BoundConstants) -> Result<f64> {
    if pot.lo < 0.0 {
        return Err(invalid("domain", "half-line potentials live on x >= 0"));
    }
    Ok(4.0 * PI * consts.c3 * weighted_integral(pot, |x| x * x)?)
}

/// `4 pi C3 int tr|V_-|^(3/2) x^2 (ln x)^2 dx` over a domain inside `(1, inf)`.
pub fn clr_log_weighted(pot: &FiberedPotential, consts: &BoundConstants) -> Result<f64> {
    if pot.lo < 1.0 {
        return Err(invalid("domain", "log-weighted bound needs x > 1"));
    }
    Ok(4.0 * PI * consts.c3 * weighted_integral(pot, |x| x * x * x.ln().powi(2))?)
}

/// `int_1^inf x^(-1-a) (ln x)^2 dx = 2 / a^3`.
pub fn log_moment_closed_form(a: f64) -> f64 {
    2.0 / (a * a * a)
}

pub fn log_moment_quadrature(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Divergent(format!("x^(-1-a) (ln x)^2 with a = {a}")));
    }
    Ok(integrate_to_infinity(|x| x.powf(-1.0 - a) * x.ln().powi(2), 1.0, QUAD_TOL)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianBound {
    pub closed_form: f64,
    pub quadrature: f64,
}

/// `8 pi C3 int_1^inf (1 + lambda/2) (lambda x^-alpha)^(3/2) x^2 (ln x)^2 dx`.
pub fn cartesian_region_bound(lambda: f64, alpha: f64, consts: &BoundConstants) -> Result<CartesianBound> {
    if !(alpha > 2.0) {
        return Err(Error::Divergent(format!("cartesian bound is finite only for alpha > 2, got {alpha}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", "must be >= 0"));
    }
    let pre = 8.0 * PI * consts.c3 * (1.0 + 0.5 * lambda) * lambda.powf(1.5);
    let a = 1.5 * alpha - 3.0;
    let closed_form = pre * log_moment_closed_form(a);
    let quadrature = if pre == 0.0 { 0.0 } else { pre * log_moment_quadrature(a)? };
    Ok(CartesianBound { closed_form, quadrature })
}

/// `C(alpha) + 2^12 pi C3 / (27 (alpha - 2)^3) lambda^(3/2 - eps(alpha))`.
pub fn theorem1_bound(lambda: f64, alpha: f64, consts: &BoundConstants, c_alpha: f64, eps_alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(invalid("alpha", format!("{alpha} must exceed 2")));
    }
    if !(eps_alpha > 0.0 && eps_alpha < 0.5 * (alpha - 2.0)) {
        return Err(invalid("eps_alpha", format!("{eps_alpha} must lie in (0, {})", 0.5 * (alpha - 2.0))));
    }
    let k = 4096.0 * PI * consts.c3 / (27.0 * (alpha - 2.0).powi(3));
    Ok(c_alpha + k * lambda.powf(1.5 - eps_alpha))
}

/// Negative eigenvalue count of the symmetric tridiagonal `(d, e)` by the
/// Sturm recurrence; exact zero pivots are nudged to `-eps * scale`.
fn sturm_count(d: &[f64], e: &[f64]) -> usize {
    let scale = d.iter().chain(e).fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut neg = 0;
    let mut p = 0.0;
    for i in 0..d.len() {
        p = if i == 0 { d[0] } else { d[i] - e[i - 1] * e[i - 1] / p };
        if p == 0.0 {
            p = -f64::EPSILON * scale;
        }
        if p < 0.0 {
            neg += 1;
        }
    }
    neg
}

fn require_finite(pot: &FiberedPotential) -> Result<()> {
    if !pot.hi.is_finite() {
        return Err(invalid("domain", "reduction checks need a bounded domain"));
    }
    Ok(())
}

fn n_ok(n: usize) -> Result<()> {
    if n < 4 {
        return Err(invalid("n", "need at least 4 grid points"));
    }
    Ok(())
}

/// `(count_1d, count_3d_radial)` on `(0, R)`, `R = pot.hi`, with the potential
/// set to zero on `(0, pot.lo)`.
///
/// The first is the 3-point count of `-u'' + V u` with `u(0) = u(R) = 0`.
/// The second discretizes the radial form `int (psi'^2 + V psi^2) r^2 dr`
/// directly by finite volumes with `r^2` weights, a free node at `r = 0` and
/// `psi(R) = 0`.
pub fn radial_lift_check(pot: &FiberedPotential, n: usize) -> Result<(usize, usize)> {
    require_finite(pot)?;
    n_ok(n)?;
    if pot.lo < 0.0 {
        return Err(invalid("domain", "radial potentials live on r >= 0"));
    }
    let big_r = pot.hi;
    let h = big_r / (n + 1) as f64;
    let v = |k: usize, r: f64| if r < pot.lo { 0.0 } else { pot.level(k, r) };
    let (mut c1, mut c3) = (0, 0);
    for k in 0..pot.rank.max(1) {
        let d: Vec<f64> = (1..=n).map(|i| 2.0 / (h * h) + v(k, i as f64 * h)).collect();
        c1 += sturm_count(&d, &vec![-1.0 / (h * h); n - 1]);

        // nodes r_i = i h, i = 0..n; psi_{n+1} = 0
        let mut d = vec![0.0; n + 1];
        let mut e = vec![0.0; n];
        for i in 0..=n {
            let r = i as f64 * h;
            let (rl, rr) = ((r - 0.5 * h).max(0.0), r + 0.5 * h);
            let w = (rr.powi(3) - rl.powi(3)) / 3.0;
            let kl = if i > 0 { rl * rl / h } else { 0.0 };
            let kr = rr * rr / h;
            d[i] = kl + kr + v(k, r) * w;
            if i < n {
                e[i] = -kr;
            }
        }
        c3 += sturm_count(&d, &e);
    }
    Ok((c1, c3))
}

/// `(count_original, count_transformed)` for `-d^2 - 1/(4x^2) + V` on `(1, X)`
/// and `-d_t^2 + e^(2t) V(e^t)` on `(0, ln X)`, both Dirichlet with `n`
/// interior points.
pub fn log_substitution_check(pot: &FiberedPotential, n: usize) -> Result<(usize, usize)> {
    require_finite(pot)?;
    n_ok(n)?;
    if !(pot.lo >= 1.0) {
        return Err(invalid("domain", "needs (1, X)"));
    }
    let (a, b) = (pot.lo, pot.hi);
    let (mut c0, mut c1) = (0, 0);
    for k in 0..pot.rank.max(1) {
        let h = (b - a) / (n + 1) as f64;
        let d: Vec<f64> = (1..=n)
            .map(|i| {
                let x = a + i as f64 * h;
                2.0 / (h * h) - 0.25 / (x * x) + pot.level(k, x)
            })
            .collect();
        c0 += sturm_count(&d, &vec![-1.0 / (h * h); n - 1]);

        let (ta, tb) = (a.ln(), b.ln());
        let ht = (tb - ta) / (n + 1) as f64;
        let d: Vec<f64> = (1..=n)
            .map(|i| {
                let t = ta + i as f64 * ht;
                2.0 / (ht * ht) + (2.0 * t).exp() * pot.level(k, t.exp())
            })
            .collect();
        c1 += sturm_count(&d, &vec![-1.0 / (ht * ht); n - 1]);
    }
    Ok((c0, c1))
}

/// Measured count against the half-line bound; reported, not asserted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSanity {
    pub measured: usize,
    pub bound: f64,
    pub holds: bool,
}

pub fn bound_sanity(pot: &FiberedPotential, n: usize, consts: &BoundConstants) -> Result<BoundSanity> {
    let (measured, _) = radial_lift_check(pot, n)?;
    let bound = clr_halfline(pot, consts)?;
    Ok(BoundSanity {
        measured,
        bound,
        holds: measured as f64 <= bound,
    })
}

/// `V^A = x^2 y^2 - |x| - lambda (1 + |x|^2)^(-alpha/2) - V_chi`.
pub fn region_a_potential(x: f64, y: f64, lambda: f64, alpha: f64, v_chi: f64) -> f64 {
    let r2 = x * x + y * y;
    x * x * y * y - r2.sqrt() - lambda * (1.0 + r2).powf(-0.5 * alpha) - v_chi
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionABound {
    /// `int_{kappa A} |V^A_-|^q (1 + |ln|x||)^(2q-1) |x|^(2(q-1)) dx`.
    pub integral: f64,
    /// `2 + 2 C_q * integral`.
    pub value: f64,
    /// Radius beyond which `V^A >= 0` on `kappa A`.
    pub radius: f64,
}

/// Polar quadrature of the centre-region bound over `kappa A = {|u| <= kappa^2 M}`.
pub fn region_a_bound(
    lambda: f64,
    alpha: f64,
    consts: &BoundConstants,
    spec: &RegionSpec,
    with_v_chi: bool,
) -> Result<RegionABound> {
    consts.validate()?;
    spec.validate()?;
    if !(lambda >= 0.0 && alpha >= 0.0) {
        return Err(invalid("lambda/alpha", "must be >= 0"));
    }
    let q = consts.q;
    let pu = partition(spec)?;
    let u_max = spec.kappa * spec.kappa * spec.m;
    let c1m = if with_v_chi { pu.c1 / (spec.m * spec.m) } else { 0.0 };
    // on kappa A: v^2 >= r^4/4 - u_max^2 and V_chi <= r^2 c1 / M^2
    let lower = |r: f64| 0.25 * r.powi(4) - u_max * u_max - r - lambda - r * r * c1m;
    let mut hi = 1.0;
    while lower(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lower(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let radius = hi;
    let phi_range = |r: f64| {
        let c = 2.0 * u_max / (r * r);
        if c >= 1.0 {
            (0.0, 0.5 * PI)
        } else {
            let p0 = 0.5 * c.acos();
            (p0, 0.5 * PI - p0)
        }
    };
    let f = |r: f64, phi: f64| {
        let (x, y) = (r * phi.cos(), r * phi.sin());
        let vc = if with_v_chi { pu.v_chi(x, y) } else { 0.0 };
        let v = region_a_potential(x, y, lambda, alpha, vc);
        if v >= 0.0 {
            return 0.0;
        }
        (-v).powf(q) * (1.0 + r.ln().abs()).powf(2.0 * q - 1.0) * r.powf(2.0 * (q - 1.0)) * r
    };
    let quarter = integrate_2d(f, (0.0, radius), phi_range, Tolerance::new(1e-9, 1e-7), Tolerance::new(1e-11, 1e-9))?;
    let integral = 4.0 * quarter.value;
    Ok(RegionABound {
        integral,
        value: 2.0 + 2.0 * consts.c_q * integral,
        radius,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClrRow {
    pub lambda: f64,
    pub alpha: f64,
    pub q: f64,
    pub bound_value: f64,
    pub components: String,
}

/// One table row: the Cartesian-region bound plus the centre-region bound
/// at the given region scale. `alpha <= 2` gives `NaN` for the total.
pub fn clr_row(lambda: f64, alpha: f64, consts: &BoundConstants, spec: &RegionSpec) -> Result<ClrRow> {
    let a = region_a_bound(lambda, alpha, consts, spec, true)?;
    let (bound_value, cart) = match cartesian_region_bound(lambda, alpha, consts) {
        Ok(c) => (a.value + c.closed_form, format!("{:.6e}", c.closed_form)),
        Err(Error::Divergent(_)) => (f64::NAN, "divergent".to_string()),
        Err(e) => return Err(e),
    };
    Ok(ClrRow {
        lambda,
        alpha,
        q: consts.q,
        bound_value,
        components: format!("region_a={:.6e};cartesian={cart};m={:.6e}", a.value, spec.m),
    })
}

/// Rows over `alphas x lambdas` with `M = (c1 + c2 + lambda)^(2/3)`.
pub fn clr_table(
    lambdas: &[f64],
    alphas: &[f64],
    consts: &BoundConstants,
    kappa: f64,
    delta: f64,
) -> Result<Vec<ClrRow>> {
    let c1 = crate::geometry::profile_c1(kappa)?;
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &lambda in lambdas {
            let spec = RegionSpec::for_lambda(lambda, c1, kappa, delta)?;
            rows.push(clr_row(lambda, alpha, consts, &spec)?);
        }
    }
    Ok(rows)
}

pub fn write_clr_csv<W: Write>(rows: &[ClrRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
