//! Zakharov–Kuznetsov equation `u_t + b u_x + u_xxx + u_xyy + u u_x = 0`
//! on a truncated half-strip `(0, X_max) × (0, L)`.
//!
//! The solver expands `u` in transverse eigenfunctions, discretizes each
//! axial profile with second-order finite differences and steps in time
//! with Crank–Nicolson for the dispersive part and Adams–Bashforth for
//! `u u_x`. The diagnostics evaluate weighted energy identities, boundary
//! norms, compatibility stacks and the exponential decay law.

pub mod compatibility;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod transverse;
pub mod weights;

pub use error::{Error, Result};
