//! Few-photon excitation of finite Frenkel-exciton chains and monolayer
//! quantum wells.
//!
//! The crate is organised bottom-up:
//!
//! - [`basis`]: field-free exciton and biexciton eigenbases, dispersion and
//!   photon-coupling amplitudes for 1D chains and 2D square wells.
//! - [`spectral`]: the one-photon quasi-energy problem (a photon level bordering
//!   a diagonal of active exciton poles), solved through its secular equation.
//! - [`dynamics`]: spectral propagation of the one-photon sector and the
//!   derived observables (exciton, collective and residual populations).
//! - [`multiphoton`]: the two-excitation sector assembled in the site basis,
//!   its spectrum, propagation and projections on free states.
//! - [`refmodels`]: two-level and three-level closed-form reference models.
//!
//! Energies are in eV and times in ns throughout.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod multiphoton;
pub mod params;
pub mod refmodels;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{Geometry, SystemParams, HBAR_EV_NS};

/// Micro-electronvolt expressed in eV.
pub const UEV: f64 = 1e-6;
