//! Radially symmetric radiative Euler equations on a bounded annulus,
//! written in Lagrangian mass coordinates.
//!
//! The gas dynamics unknowns are pressure `P`, radial velocity `u` and
//! specific entropy `s`; the radiative heat flux `q` is not evolved but
//! solved from an elliptic two-point boundary value problem at every
//! time instant, so the system is a coupled hyperbolic-elliptic one.
//! Around the equilibrium state `(P, u, s) = (1, 0, 1)` the radiation
//! term acts as a damping mechanism, and this crate ships the discrete
//! machinery to observe that:
//!
//! * [`evolution`] — explicit SSP-RK2 integration of the nonlinear
//!   system with a fresh elliptic solve per stage,
//! * [`linearized`] — the frozen-coefficient linear solver and the
//!   Picard iteration built on it, with contraction measurement,
//! * [`diagnostics`] — discrete space-time Sobolev norms, the quadratic
//!   energy/dissipation pair and a-priori-estimate monitors,
//! * [`initial_data`] — admissible data families, inductive time
//!   derivatives at `t = 0` and boundary compatibility checks,
//! * [`oracle`] — small dense linear-algebra routines (LU, matrix
//!   exponential, QR eigenvalues) kept independent of the production
//!   solver paths so they can serve as cross-checks.

// Index loops read better than iterator chains in stencil code, and
// `!(v > 0.0)` is the deliberate NaN-catching form of the positivity
// checks.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod diagnostics;
pub mod eos;
pub mod evolution;
pub mod geometry;
pub mod initial_data;
pub mod linearized;
pub mod oracle;
pub mod output;
pub mod radiation;
pub mod stencil;
pub mod tridiag;

pub use config::{Mode, RunConfig};
pub use eos::GasParams;
pub use evolution::{Problem, SimState};
pub use geometry::{AnnulusGeometry, MassGrid};
