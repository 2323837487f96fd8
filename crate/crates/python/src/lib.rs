//! Python bindings: operator counts, fiber spectra, Weyl quotients, CLR
//! integrals and fits. Every library error surfaces as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use susytoy::operators::{
    assemble_hamiltonian_with, assemble_shifted_with, Box2D, PotentialRule, SparseHermitianOperator, WeightSpec,
};

fn err(e: susytoy::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rule(name: &str) -> PyResult<PotentialRule> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown potential rule `{name}` (nodal or valley-adapted)")))
}

fn build(kind: &str, half_width: f64, h: f64, alpha: f64, lambda: f64, potential: &str) -> PyResult<SparseHermitianOperator> {
    let b = Box2D::with_spacing(half_width, h).map_err(err)?;
    let r = rule(potential)?;
    let op = match kind {
        "hamiltonian" => assemble_hamiltonian_with(&b, true, r),
        "bosonic" => assemble_hamiltonian_with(&b, false, r),
        "shifted" => assemble_shifted_with(&b, &WeightSpec::new(alpha, lambda).map_err(err)?, r, true),
        "bosonic-shifted" => assemble_shifted_with(&b, &WeightSpec::new(alpha, lambda).map_err(err)?, r, false),
        _ => return Err(PyValueError::new_err(format!("unknown operator kind `{kind}`"))),
    };
    op.map_err(err)
}

/// Number of eigenvalues below `shift` of the operator on `[-L, L]^2`.
#[pyfunction]
#[pyo3(signature = (kind, half_width, h, alpha=0.0, lambda_=0.0, potential="nodal", shift=0.0))]
fn count_negative(
    kind: &str,
    half_width: f64,
    h: f64,
    alpha: f64,
    lambda_: f64,
    potential: &str,
    shift: f64,
) -> PyResult<usize> {
    let op = build(kind, half_width, h, alpha, lambda_, potential)?;
    Ok(susytoy::eigensolve::count_negative(&op, shift).map_err(err)?.n_negative)
}

/// The `k` lowest eigenvalues.
#[pyfunction]
#[pyo3(signature = (kind, half_width, h, k, alpha=0.0, lambda_=0.0, potential="nodal", tol=1e-8))]
#[allow(clippy::too_many_arguments)]
fn lowest_eigenvalues(
    kind: &str,
    half_width: f64,
    h: f64,
    k: usize,
    alpha: f64,
    lambda_: f64,
    potential: &str,
    tol: f64,
) -> PyResult<Vec<f64>> {
    let op = build(kind, half_width, h, alpha, lambda_, potential)?;
    Ok(susytoy::eigensolve::lowest_eigenpairs(&op, k, tol).map_err(err)?.eigenvalues)
}

/// `(value, tol_disc)` of the fiber ground energy.
#[pyfunction]
fn fiber_ground_energy(epsilon: f64) -> PyResult<(f64, f64)> {
    let p = susytoy::fiber::default_fiber(epsilon).map_err(err)?;
    let g = susytoy::fiber::ground_energy(&p).map_err(err)?;
    Ok((g.value, g.tol_disc))
}

#[pyfunction]
fn fiber_gap(epsilon: f64) -> PyResult<f64> {
    let p = susytoy::fiber::default_fiber(epsilon).map_err(err)?;
    Ok(susytoy::fiber::excitation_gap(&p).map_err(err)?.value)
}

#[pyfunction]
fn projector_bound_check(epsilon: f64, a: f64, c: f64) -> PyResult<bool> {
    let p = susytoy::fiber::default_fiber(epsilon).map_err(err)?;
    Ok(susytoy::fiber::projector_bound_check(&p, a, c).map_err(err)?.holds)
}

/// `(form, weighted_norm, quotient)` for the Weyl state at `t`.
#[pyfunction]
fn weyl_quotient(t: f64, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let profile = susytoy::weyl::CutoffProfile::standard().map_err(err)?;
    let s = susytoy::weyl::weyl_state(t, profile).map_err(err)?;
    let q = susytoy::weyl::weighted_quotient(&s, &WeightSpec::new(alpha, 0.0).map_err(err)?).map_err(err)?;
    Ok((q.form, q.weighted_norm, q.quotient))
}

#[pyfunction]
fn log_moment(a: f64) -> PyResult<(f64, f64)> {
    let q = susytoy::clr::log_moment_quadrature(a).map_err(err)?;
    Ok((susytoy::clr::log_moment_closed_form(a), q))
}

#[pyfunction]
#[pyo3(signature = (lambda_, alpha, c3=0.1156))]
fn cartesian_region_bound(lambda_: f64, alpha: f64, c3: f64) -> PyResult<f64> {
    let consts = susytoy::clr::BoundConstants { c3, ..Default::default() };
    consts.validate().map_err(err)?;
    Ok(susytoy::clr::cartesian_region_bound(lambda_, alpha, &consts).map_err(err)?.closed_form)
}

#[pyfunction]
fn to_parabolic(x: f64, y: f64) -> (f64, f64) {
    susytoy::geometry::to_parabolic(x, y)
}

#[pyfunction]
fn from_parabolic(u: f64, v: f64) -> PyResult<(f64, f64)> {
    susytoy::geometry::from_parabolic(u, v).map_err(err)
}

/// `(exponent, prefactor, r_squared)` of a `power` or `power_log` fit.
#[pyfunction]
#[pyo3(signature = (points, model="power"))]
fn fit_growth(points: Vec<(f64, f64)>, model: &str) -> PyResult<(f64, f64, f64)> {
    let m = match model {
        "power" => susytoy::experiments::FitModel::Power,
        "power_log" => susytoy::experiments::FitModel::PowerLog,
        _ => return Err(PyValueError::new_err(format!("unknown model `{model}`"))),
    };
    let f = susytoy::experiments::fit_growth(&points, m).map_err(err)?;
    Ok((f.exponent, f.prefactor, f.r_squared))
}

#[pymodule]
fn pysusytoy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(count_negative, m)?)?;
    m.add_function(wrap_pyfunction!(lowest_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_ground_energy, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_gap, m)?)?;
    m.add_function(wrap_pyfunction!(projector_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(log_moment, m)?)?;
    m.add_function(wrap_pyfunction!(cartesian_region_bound, m)?)?;
    m.add_function(wrap_pyfunction!(to_parabolic, m)?)?;
    m.add_function(wrap_pyfunction!(from_parabolic, m)?)?;
    m.add_function(wrap_pyfunction!(fit_growth, m)?)?;
    Ok(())
}
