//! Transverse-mode dynamics of an optical parametric oscillator injected with
//! a first-order (orbital angular momentum carrying) signal seed.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`mode`]: first-order LG/HG modes, Stokes parameters and the Poincaré sphere.
//! * [`dynamics`]: the five coupled-mode equations, the injection-aligned basis
//!   and a fixed-step RK4 integrator.
//! * [`steady`]: free-running and injected steady states, the pump quintic.
//! * [`geometry`]: solid angles of closed sphere paths and geometric phases.
//! * [`sweep`]: adiabatic driving of the full ODE around a closed path.
//! * [`interference`]: signal/idler field synthesis, interference maps and
//!   pattern rotation estimation.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod geometry;
pub mod interference;
pub mod mode;
pub mod poly;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};

pub use num_complex::Complex64;
