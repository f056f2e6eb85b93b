//! Numerical laboratory for damped hypoelliptic evolution equations.
//!
//! The crate discretizes the Grushin operator `-(∂x₁² + |x₁|^{2(k-1)} ∂x₂²)` on
//! `[-1,1] × ℝ/ℤ` (finite differences in `x₁`, exact Fourier modes in `x₂`),
//! builds the damped wave, Schrödinger and plate generators on top of it, and
//! provides:
//!
//! * [`operators`]: grids, Fourier mode sets, Grushin/flat Laplacians and damping
//!   multiplication operators, all stored block-diagonally.
//! * [`generators`]: first-order generators, quadratic pencils, spectra with
//!   localization flags, and the kernel spectral projector.
//! * [`resolvent`]: energy-metric resolvent norms along `iℝ`, exponential growth
//!   fits, tunneling quasimodes and spectral-gap regions.
//! * [`pipeline`]: the chain from an observability cost `G` to a logarithmic
//!   decay envelope through `M_log⁻¹`.
//! * [`timestepping`]: implicit-midpoint and spectral evolution, dissipation
//!   identities, decay measurements and an observability-cost probe.
//! * [`cli`]: configuration parsing and experiment orchestration for the
//!   `hypolab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod operators;
pub mod pipeline;
pub mod resolvent;
pub mod stats;
pub mod timestepping;

pub use error::{Error, Result};
pub use faer::c64;
