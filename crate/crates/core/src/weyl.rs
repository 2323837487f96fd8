//! Trial states `Psi_t = chi_t(x) phi_x(y) xi` along the x valley and their
//! energy and weighted-norm integrals.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operators::{
    self, pauli, sample_spinor, Box2D, PotentialRule, SparseHermitianOperator, WeightSpec,
};
use crate::quadrature::{integrate, integrate_2d, Estimate, Tolerance};

/// `exp(-1 / (1 - z^2))` on `|z| < 1`, zero elsewhere.
fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z * z)).exp()
    }
}

fn bump_prime(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - z * z;
        bump(z) * (-2.0 * z / (q * q))
    }
}

/// Smooth bump on `[1, 2]` with unit L2 norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    /// Multiplies `bump(2s - 3)`.
    pub normalization: f64,
}

impl CutoffProfile {
    pub fn standard() -> Result<Self> {
        let sq = integrate(|s| bump(2.0 * s - 3.0).powi(2), 1.0, 2.0, Tolerance::new(1e-16, 1e-14))?;
        Ok(Self {
            normalization: sq.value.sqrt().recip(),
        })
    }

    pub fn value(&self, s: f64) -> f64 {
        self.normalization * bump(2.0 * s - 3.0)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        2.0 * self.normalization * bump_prime(2.0 * s - 3.0)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        Ok(integrate(|s| self.value(s).powi(2), 1.0, 2.0, Tolerance::new(1e-16, 1e-14))?.value)
    }
}

/// Normalized oscillator ground state `(x/pi)^(1/4) exp(-x y^2 / 2)` at fixed `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorGround {
    pub x: f64,
}

pub fn oscillator_ground(x: f64) -> Result<OscillatorGround> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid("x", format!("{x} must be positive")));
    }
    Ok(OscillatorGround { x })
}

impl OscillatorGround {
    pub fn value(&self, y: f64) -> f64 {
        (self.x / PI).powf(0.25) * (-0.5 * self.x * y * y).exp()
    }

    /// `d/dy`.
    pub fn dy(&self, y: f64) -> f64 {
        -self.x * y * self.value(y)
    }

    /// `d^2/dy^2`.
    pub fn dyy(&self, y: f64) -> f64 {
        let x = self.x;
        (x * x * y * y - x) * self.value(y)
    }

    /// `d/dx` of the family at this `x`.
    pub fn dx(&self, y: f64) -> f64 {
        (0.25 / self.x - 0.5 * y * y) * self.value(y)
    }
}

/// The trial spinor at scale `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylState {
    pub t: f64,
    pub profile: CutoffProfile,
    /// Unit spinor with `gamma1 xi = -xi`.
    pub xi: [Complex64; 2],
    /// `||Psi_t||^2` by quadrature.
    pub norm_sq: f64,
}

pub fn weyl_state(t: f64, profile: CutoffProfile) -> Result<WeylState> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(invalid("t", format!("{t} must be >= 1")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut st = WeylState {
        t,
        profile,
        xi: [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        norm_sq: f64::NAN,
    };
    st.norm_sq = integrate_2d(
        |x, y| {
            let c = st.chi(x);
            c * c * oscillator_ground_unchecked(x).value(y).powi(2)
        },
        st.support(),
        y_range,
        Tolerance::new(1e-14, 1e-12),
        Tolerance::new(1e-16, 1e-13),
    )?
    .value;
    Ok(st)
}

fn oscillator_ground_unchecked(x: f64) -> OscillatorGround {
    OscillatorGround { x }
}

/// Transverse integration window; the Gaussian is below `e^-40` outside it.
fn y_range(x: f64) -> (f64, f64) {
    let w = 9.0 / x.sqrt();
    (-w, w)
}

impl WeylState {
    pub fn support(&self) -> (f64, f64) {
        (self.t, 2.0 * self.t)
    }

    pub fn chi(&self, x: f64) -> f64 {
        self.profile.value(x / self.t) / self.t.sqrt()
    }

    pub fn chi_prime(&self, x: f64) -> f64 {
        self.profile.derivative(x / self.t) / (self.t * self.t.sqrt())
    }

    /// `<xi, g xi>` for the two matrices entering the potential.
    fn fermion_expectations(&self) -> (f64, f64) {
        let e = |g: &pauli::Mat2| {
            let v = pauli::apply(g, self.xi);
            (self.xi[0].conj() * v[0] + self.xi[1].conj() * v[1]).re
        };
        (e(&pauli::GAMMA1), e(&pauli::GAMMA2))
    }

    /// Scalar amplitude `chi_t(x) phi_x(y)`; zero for `x <= 0`.
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.chi(x) * oscillator_ground_unchecked(x).value(y)
    }

    /// Samples the spinor onto the interior nodes of `b`.
    pub fn sample(&self, b: &Box2D) -> Vec<Complex64> {
        sample_spinor(b, |x, y| {
            let a = self.amplitude(x, y);
            [self.xi[0] * a, self.xi[1] * a]
        })
    }
}

/// `<Psi_t, H Psi_t>` by iterated adaptive quadrature of the closed-form
/// integrand `|d_x psi|^2 + |d_y psi|^2 + (x^2 y^2 + x <g1> - y <g2>) psi^2`.
pub fn quadratic_form(state: &WeylState) -> Result<Estimate> {
    let (g1, g2) = state.fermion_expectations();
    // the potential terms cancel at the scale chi_t^2 x = O(1) after
    // integrating over y, so the inner target is absolute
    integrate_2d(
        |x, y| {
            let phi = oscillator_ground_unchecked(x);
            let (c, cp) = (state.chi(x), state.chi_prime(x));
            let dx = cp * phi.value(y) + c * phi.dx(y);
            let dy = c * phi.dy(y);
            let psi = c * phi.value(y);
            dx * dx + dy * dy + (x * x * y * y + x * g1 - y * g2) * psi * psi
        },
        state.support(),
        y_range,
        Tolerance::new(1e-14, 1e-9),
        Tolerance::new(1e-12, 1e-12),
    )
}

/// `<Psi_t, rho Psi_t>`.
pub fn weighted_norm(state: &WeylState, spec: &WeightSpec) -> Result<Estimate> {
    spec.validate()?;
    integrate_2d(
        |x, y| {
            let psi = state.amplitude(x, y);
            psi * psi * spec.rho(x, y)
        },
        state.support(),
        y_range,
        Tolerance::new(1e-300, 1e-11),
        Tolerance::new(1e-300, 1e-12),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quotient {
    pub form: f64,
    pub weighted_norm: f64,
    pub quotient: f64,
    /// Propagated absolute error of the quotient.
    pub error: f64,
}

pub fn weighted_quotient(state: &WeylState, spec: &WeightSpec) -> Result<Quotient> {
    let q = quadratic_form(state)?;
    let w = weighted_norm(state, spec)?;
    let quotient = q.value / w.value;
    let error = quotient.abs() * (q.error / q.value.abs() + w.error / w.value.abs());
    Ok(Quotient {
        form: q.value,
        weighted_norm: w.value,
        quotient,
        error,
    })
}

/// Discrete Rayleigh quotient of the sampled state for the grid Hamiltonian
/// on a box `[-(2t+1), 2t+1] x [-Y, Y]` with spacing close to `h`.
pub fn grid_rayleigh_quotient(state: &WeylState, h: f64, rule: PotentialRule) -> Result<f64> {
    let lx = 2.0 * state.t + 1.0;
    let ly = 3.0f64.max(10.0 / state.t.sqrt());
    let n = |l: f64| (2.0 * l / h).round() as usize + 1;
    let b = Box2D::new(lx, ly, n(lx), n(ly))?;
    let op: SparseHermitianOperator = operators::assemble_hamiltonian_with(&b, true, rule)?;
    let v = state.sample(&b);
    let nn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    Ok(op.quadratic_form(&v) / nn)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub t: f64,
    pub alpha: f64,
    pub form: f64,
    pub weighted_norm: f64,
    pub quotient: f64,
    pub quadrature_error: f64,
}

pub fn weyl_sweep(ts: &[f64], alphas: &[f64], profile: CutoffProfile) -> Result<Vec<WeylRow>> {
    let mut rows = Vec::with_capacity(ts.len() * alphas.len());
    for &alpha in alphas {
        for &t in ts {
            let st = weyl_state(t, profile)?;
            let q = weighted_quotient(&st, &WeightSpec::new(alpha, 0.0)?)?;
            rows.push(WeylRow {
                t,
                alpha,
                form: q.form,
                weighted_norm: q.weighted_norm,
                quotient: q.quotient,
                quadrature_error: q.error,
            });
        }
    }
    Ok(rows)
}

pub fn write_weyl_csv<W: Write>(rows: &[WeylRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
