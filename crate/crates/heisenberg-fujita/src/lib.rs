//! Numerical engine for the Hardy–Hénon heat equation `u_t − Δ_H u = |η|^γ u^p`
//! on the Heisenberg group.
//!
//! * [`hgroup`]: group law, dilations, homogeneous norms.
//! * [`kernel`]: heat kernel quadrature and its structural checks.
//! * [`field`]: grid fields on H¹ and the discrete heat semigroup.
//! * [`evolve`]: mild-solution time stepping, Picard windows, monotone global constructions.
//! * [`diagnostics`]: decay fits, blow-up functionals and brute-force oracles.
//! * [`cli`]: run configuration, sweeps and result files.

// `!(x > 0.0)` also rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod field;
pub mod hgroup;
pub mod kernel;
pub mod quad;

pub use error::{Error, Result};
