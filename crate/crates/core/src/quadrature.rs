//! Adaptive Gauss-Kronrod (7/15) quadrature on finite and semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute and relative targets; the estimate is accepted once
/// `error <= max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs_k = k.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        fv[j] = (f1, f2);
        k += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = k * h;
    let (abs_k, asc) = (abs_k * h.abs(), asc * h.abs());
    let mut err = ((k - g) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_k);
    }
    (value, err, abs_k)
}

const MAX_PIECES: usize = 4000;

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature {
            estimate: f64::NAN,
            error_estimate: f64::INFINITY,
        });
    }
    let (v, e, r) = gk15(&mut f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e, resabs: r });
    let (mut total, mut err, mut resabs) = (v, e, r);
    // nothing below the rounding level of |f| can be resolved
    let floor = |resabs: f64| 100.0 * f64::EPSILON * resabs;
    while err > tol.target(total).max(floor(resabs)) {
        if heap.len() >= MAX_PIECES || !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error_estimate: err,
            });
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a.min(p.b) || m >= p.a.max(p.b) {
            // interval cannot be split further in floating point
            return Err(Error::Quadrature {
                estimate: total,
                error_estimate: err,
            });
        }
        let (v1, e1, r1) = gk15(&mut f, p.a, m);
        let (v2, e2, r2) = gk15(&mut f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        resabs += r1 + r2 - p.resabs;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1, resabs: r1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2, resabs: r2 });
    }
    // re-sum to shed accumulated cancellation
    let (value, error) = heap.iter().fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.error));
    Ok(Estimate { value, error, evaluations: evals })
}

const MAX_PANELS: usize = 1000;
const STALL_PANELS: usize = 40;

/// Integral over `[a, inf)` summed over geometrically growing panels.
///
/// Summation stops once a panel contributes less than `1e-14` of the running
/// total (or the integrand has vanished over 64 consecutive panels). A tail
/// whose panel contributions stop shrinking is reported as divergent.
pub fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, a: f64, tol: Tolerance) -> Result<Estimate> {
    if !a.is_finite() {
        return Err(Error::Quadrature {
            estimate: f64::NAN,
            error_estimate: f64::INFINITY,
        });
    }
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evals = 0;
    let mut lo = a;
    let mut prev: Option<f64> = None;
    let mut stalled = 0;
    let mut zeros = 0;
    for _ in 0..MAX_PANELS {
        let hi = if lo > 0.0 { 2.0 * lo } else { lo + 1.0 };
        if !hi.is_finite() {
            break;
        }
        // panel tolerance: small against what has accumulated so far
        let ptol = Tolerance::new(tol.abs * 1e-3, tol.rel * 1e-2);
        let est = integrate(&mut f, lo, hi, ptol)?;
        evals += est.evaluations;
        total += est.value;
        error += est.error;
        let mag = est.value.abs();
        if mag == 0.0 {
            zeros += 1;
            if zeros >= 64 {
                return Ok(Estimate { value: total, error, evaluations: evals });
            }
        } else {
            zeros = 0;
            if let Some(p) = prev {
                if p > 0.0 && mag >= 0.999 * p {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                if stalled >= STALL_PANELS {
                    return Err(Error::Divergent(format!(
                        "panel contributions stop decaying beyond x = {lo:e}"
                    )));
                }
                if mag <= 1e-14 * total.abs() && mag < p {
                    // remaining geometric tail bounded by a few more panels
                    let r = (mag / p).min(0.99);
                    error += mag * r / (1.0 - r);
                    return Ok(Estimate { value: total, error, evaluations: evals });
                }
            }
            prev = Some(mag);
        }
        lo = hi;
    }
    Err(Error::Divergent(format!(
        "no convergence after {MAX_PANELS} panels (running value {total:e})"
    )))
}

/// Iterated integral `int_a^b int_{c(x)}^{d(x)} f(x, y) dy dx`.
///
/// The inner integrals are evaluated to `inner` tolerance; their error is
/// accumulated into the returned estimate.
pub fn integrate_2d(
    mut f: impl FnMut(f64, f64) -> f64,
    (a, b): (f64, f64),
    y_range: impl Fn(f64) -> (f64, f64),
    outer: Tolerance,
    inner: Tolerance,
) -> Result<Estimate> {
    let mut inner_err = 0.0;
    let mut inner_evals = 0;
    let mut failure = None;
    let est = integrate(
        |x| {
            let (c, d) = y_range(x);
            match integrate(|y| f(x, y), c, d, inner) {
                Ok(e) => {
                    inner_err += e.error.abs();
                    inner_evals += e.evaluations;
                    e.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        a,
        b,
        outer,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let est = est?;
    // inner errors were accumulated per node; scale by the mean weight
    let nodes = (est.evaluations.max(1)) as f64;
    Ok(Estimate {
        value: est.value,
        error: est.error + inner_err * (b - a).abs() / nodes,
        evaluations: est.evaluations + inner_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x * x * x - x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_on_real_line() {
        let e = integrate(|x| (-x * x).exp(), -12.0, 12.0, Tolerance::new(1e-14, 1e-13)).unwrap();
        assert!((e.value - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn log_weighted_tails() {
        for a in [1.0f64, 2.0, 3.0] {
            let e = integrate_to_infinity(
                |x| x.powf(-1.0 - a) * x.ln().powi(2),
                1.0,
                Tolerance::default(),
            )
            .unwrap();
            let exact = 2.0 / a.powi(3);
            assert!(((e.value - exact) / exact).abs() < 1e-10, "a={a}: {}", e.value);
        }
    }

    #[test]
    fn harmonic_tail_diverges() {
        assert!(matches!(
            integrate_to_infinity(|x| 1.0 / x, 1.0, Tolerance::default()),
            Err(Error::Divergent(_))
        ));
        assert!(matches!(
            integrate_to_infinity(|x| x.ln().powi(2) / x, 1.0, Tolerance::default()),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn zero_integrand() {
        let e = integrate_to_infinity(|_| 0.0, 1.0, Tolerance::default()).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn iterated_gaussian() {
        let e = integrate_2d(
            |x, y| (-(x * x + y * y)).exp(),
            (-9.0, 9.0),
            |_| (-9.0, 9.0),
            Tolerance::new(1e-12, 1e-12),
            Tolerance::new(1e-14, 1e-13),
        )
        .unwrap();
        assert!((e.value - std::f64::consts::PI).abs() < 1e-11);
    }
}
