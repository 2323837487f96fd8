//! Parabolic coordinates, the valley/center region split and its partition of unity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Region scale `M`, dilation `kappa` and valley-split fraction `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub m: f64,
    pub kappa: f64,
    pub delta: f64,
}

pub const DEFAULT_KAPPA: f64 = std::f64::consts::SQRT_2;
pub const DEFAULT_DELTA: f64 = 0.8;

impl RegionSpec {
    pub fn new(m: f64, kappa: f64, delta: f64) -> Result<Self> {
        let s = Self { m, kappa, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn with_scale(m: f64) -> Result<Self> {
        Self::new(m, DEFAULT_KAPPA, DEFAULT_DELTA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(invalid("M", format!("{} must be positive", self.m)));
        }
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", format!("{} must exceed 1", self.kappa)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", format!("{} must lie in (0, 1)", self.delta)));
        }
        Ok(())
    }

    /// Dirichlet-splitting constant `(1 - delta)^-2`.
    pub fn c2(&self) -> f64 {
        (1.0 - self.delta).powi(-2)
    }

    /// Scale `M = (c1 + c2 + lambda)^(2/3)` for the given shift.
    pub fn for_lambda(lambda: f64, c1: f64, kappa: f64, delta: f64) -> Result<Self> {
        let c2 = (1.0 - delta).powi(-2);
        Self::new((c1 + c2 + lambda).powf(2.0 / 3.0), kappa, delta)
    }
}

pub fn to_parabolic(x: f64, y: f64) -> (f64, f64) {
    (0.5 * (x * x - y * y), x * y)
}

/// Right-half-plane preimage of `(u, v)`. The closed negative `u` axis
/// (`v = 0, u <= 0`) has no preimage with `x > 0` and is rejected.
pub fn from_parabolic(u: f64, v: f64) -> Result<(f64, f64)> {
    if v == 0.0 && u <= 0.0 {
        return Err(invalid("(u, v)", format!("({u}, {v}) lies on the slit")));
    }
    let r = u.hypot(v);
    if u >= 0.0 {
        let x = (r + u).sqrt();
        Ok((x, v / x))
    } else {
        // r + u cancels here; go through y instead
        let y = (r - u).sqrt().copysign(v);
        Ok((v / y, y))
    }
}

/// `2^(-1/2) (u^2 + v^2)^(-1/4)`, which equals `(x^2 + y^2)^(-1/2)`.
pub fn scale_factor(u: f64, v: f64) -> Result<f64> {
    if u == 0.0 && v == 0.0 {
        return Err(invalid("(u, v)", "the map is not conformal at the origin"));
    }
    Ok(std::f64::consts::FRAC_1_SQRT_2 * u.hypot(v).powf(-0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B1,
    B2,
    B3,
    B4,
}

impl Region {
    /// Image under `x -> -x`.
    pub fn reflect_x(self) -> Self {
        match self {
            Region::B1 => Region::B2,
            Region::B2 => Region::B1,
            r => r,
        }
    }

    /// Image under `(x, y) -> (y, x)`.
    pub fn reflect_diagonal(self) -> Self {
        match self {
            Region::A => Region::A,
            Region::B1 => Region::B3,
            Region::B3 => Region::B1,
            Region::B2 => Region::B4,
            Region::B4 => Region::B2,
        }
    }
}

/// `A`: `|u| <= M` (closed). `B1`: `u > M, x > 0`, `B2` its mirror in `x = 0`,
/// `B3` the mirror of `B1` in `x = y`, `B4` the mirror of `B2` in `x = y`.
pub fn classify(x: f64, y: f64, spec: &RegionSpec) -> Region {
    let (u, _) = to_parabolic(x, y);
    if u.abs() <= spec.m {
        Region::A
    } else if u > 0.0 {
        if x > 0.0 {
            Region::B1
        } else {
            Region::B2
        }
    } else if y > 0.0 {
        Region::B3
    } else {
        Region::B4
    }
}

fn step_bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

/// `chi_A = cos(pi/2 S(tau))`, `chi_B = sin(pi/2 S(tau))` with `S` the
/// normalized integral of a smooth bump and `tau = (|u| - M) / ((kappa^2 - 1) M)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionOfUnity {
    pub spec: RegionSpec,
    /// `int_0^1 exp(-1 / (s (1 - s))) ds`.
    pub step_normalization: f64,
    /// `sup V_chi^uv * M^2` for this profile.
    pub c1: f64,
}

pub fn partition(spec: &RegionSpec) -> Result<PartitionOfUnity> {
    spec.validate()?;
    let z = integrate(step_bump, 0.0, 1.0, Tolerance::new(1e-18, 1e-14))?.value;
    let peak = step_bump(0.5) / z;
    let c1 = (0.5 * PI * peak).powi(2) / (spec.kappa * spec.kappa - 1.0).powi(2);
    Ok(PartitionOfUnity {
        spec: *spec,
        step_normalization: z,
        c1,
    })
}

/// Default-profile `c1` (independent of `M`).
pub fn profile_c1(kappa: f64) -> Result<f64> {
    Ok(partition(&RegionSpec::new(1.0, kappa, DEFAULT_DELTA)?)?.c1)
}

impl PartitionOfUnity {
    fn width(&self) -> f64 {
        (self.spec.kappa * self.spec.kappa - 1.0) * self.spec.m
    }

    fn tau(&self, u: f64) -> f64 {
        ((u.abs() - self.spec.m) / self.width()).clamp(0.0, 1.0)
    }

    /// Smooth step from 0 (`tau <= 0`) to 1 (`tau >= 1`).
    pub fn step(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        if tau >= 1.0 {
            return 1.0;
        }
        // integrate over the shorter side for accuracy
        let tol = Tolerance::new(1e-18, 1e-14);
        let part = |a: f64, b: f64| {
            integrate(step_bump, a, b, tol).map(|e| e.value).unwrap_or(f64::NAN)
        };
        if tau <= 0.5 {
            part(0.0, tau) / self.step_normalization
        } else {
            1.0 - part(tau, 1.0) / self.step_normalization
        }
    }

    pub fn chi_a(&self, u: f64) -> f64 {
        (0.5 * PI * self.step(self.tau(u))).cos()
    }

    pub fn chi_b(&self, u: f64) -> f64 {
        (0.5 * PI * self.step(self.tau(u))).sin()
    }

    /// `|grad_uv chi_A|^2 + |grad_uv chi_B|^2`, a function of `u` alone.
    pub fn v_chi_uv(&self, u: f64) -> f64 {
        let tau = (u.abs() - self.spec.m) / self.width();
        if tau <= 0.0 || tau >= 1.0 {
            return 0.0;
        }
        let ds = step_bump(tau) / self.step_normalization;
        (0.5 * PI * ds / self.width()).powi(2)
    }

    /// The same in Cartesian coordinates: `(x^2 + y^2) V_chi^uv(u)`.
    pub fn v_chi(&self, x: f64, y: f64) -> f64 {
        let (u, _) = to_parabolic(x, y);
        (x * x + y * y) * self.v_chi_uv(u)
    }
}

/// Valley extent `r_lambda` and the transverse scale of the valley fiber.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValleyGeometry {
    pub lambda: f64,
    pub alpha: f64,
    pub c1: f64,
    pub m: f64,
    pub r_lambda: f64,
    /// Balance-equation value at `r_lambda`.
    pub residual: f64,
}

impl ValleyGeometry {
    /// `r^-2 (r + lambda r^-alpha)^(1/2)`.
    pub fn phi_r(&self, r: f64) -> f64 {
        (r + self.lambda * r.powf(-self.alpha)).sqrt() / (r * r)
    }
}

fn balance(r: f64, lambda: f64, alpha: f64, c1: f64, m: f64) -> f64 {
    -0.25 * r.powi(4) + r + lambda * (1.0 + r * r).powf(-0.5 * alpha) + r * r * c1 / (m * m)
}

/// Outermost positive root of
/// `-r^4/4 + r + lambda (1 + r^2)^(-alpha/2) + r^2 c1 / M^2 = 0` by bisection.
pub fn valley_geometry(lambda: f64, spec: &RegionSpec, alpha: f64, c1: f64) -> Result<ValleyGeometry> {
    spec.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("{lambda} must be >= 0")));
    }
    if !(alpha >= 0.0 && c1 >= 0.0) {
        return Err(invalid("alpha/c1", "must be non-negative"));
    }
    let f = |r: f64| balance(r, lambda, alpha, c1, spec.m);
    let mut hi = 1.0;
    while f(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e100 {
            return Err(Error::Bracket(format!("no sign change up to r = {hi:e}")));
        }
    }
    // walk down to a point where the balance is positive
    let mut lo = hi / 2.0;
    while f(lo) < 0.0 {
        lo /= 2.0;
        if lo < 1e-300 {
            return Err(Error::Bracket("balance is negative near r = 0".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    Ok(ValleyGeometry {
        lambda,
        alpha,
        c1,
        m: spec.m,
        r_lambda: r,
        residual: f(r),
    })
}

/// JSON-ready description of a region split and its partition profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionExport {
    pub spec: RegionSpec,
    pub c1: f64,
    pub c2: f64,
    pub profile: String,
    pub step_normalization: f64,
    pub transition: (f64, f64),
}

pub fn export_regions(spec: &RegionSpec) -> Result<RegionExport> {
    let p = partition(spec)?;
    Ok(RegionExport {
        spec: *spec,
        c1: p.c1,
        c2: spec.c2(),
        profile: "chi_A = cos(pi/2 S(tau)), S = normalized integral of exp(-1/(s(1-s)))".into(),
        step_normalization: p.step_normalization,
        transition: (spec.m, spec.kappa * spec.kappa * spec.m),
    })
}
