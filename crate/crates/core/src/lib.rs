//! Two-level spin dynamics and its cross-formulation checks.
//!
//! The crate evolves a single spin-½ moment under six equivalent or related
//! laws and compares them in the Bloch-sphere picture:
//!
//! * classical precession `dm/dt = γ m × B` and its Landau–Lifshitz–Gilbert
//!   extension with induction factor `k_i`,
//! * the von Neumann equation `iħ dρ/dt = [H, ρ]` and its nonlinear variant,
//! * the space-independent Schrödinger–Pauli equation and its collapse variant.
//!
//! [`pauli`] holds the 2×2 complex kernel, [`states`] the three state
//! representations, [`dynamics`] the right-hand sides and the RK4 driver,
//! [`cqd`] the co-quantum collapse rules and ensemble sampler, and
//! [`verification`] the numerical certificates. [`cli`] wires them to the
//! `spinform` binary.

// `!(x <= tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cqd;
pub mod dynamics;
mod error;
pub mod pauli;
pub mod states;
pub mod tolerances;
pub mod verification;

pub use error::{Error, NonFiniteSnapshot, Result};
pub use pauli::{Mat2, Vec3};
pub use states::{BlochAngles, DensityMatrix, Spinor};
