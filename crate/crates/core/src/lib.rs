//! Numerical toolkit for the supersymmetric `x^2 y^2` model.
//!
//! - [`operators`]: finite-difference assembly on Dirichlet boxes.
//! - [`eigensolve`]: low-lying spectra and exact inertia counts.
//! - [`weyl`]: Weyl states along a valley and their weighted quotients.
//! - [`geometry`]: parabolic coordinates, region split and partition of unity.
//! - [`fiber`]: the one-dimensional valley fiber, its ground energy and gap.
//! - [`clr`]: CLR-type bound integrals and discrete checks of their reductions.
//! - [`experiments`]: counting experiments, fits, configs and the sweep runner.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clr;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod experiments;
pub mod fiber;
pub mod operators;
pub mod quadrature;
pub mod weyl;

pub use error::{Error, Result};
