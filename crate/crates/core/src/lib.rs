//! Numerical laboratory for a magnetic fractional pseudo-parabolic evolution
//! with an Orlicz-type nonlocal diffusion term.
//!
//! The crate is organized bottom-up:
//!
//! * [`nfunc`] — N-functions (Young functions) and their calculus: exponent
//!   bounds, complementary functions, Luxemburg norms, inequality predicates.
//! * [`grid`] — 1-D grid with zero exterior extension, quadrature weights for
//!   the singular pair measure, and magnetic difference quotients.
//! * [`functionals`] — energy functionals J and I, Nehari projection, and the
//!   potential-well landscape (C*, h, M, d, d(δ), λ_α).
//! * [`evolve`] — time integration of the lumped-mass Galerkin system with an
//!   energy-identity monitor.
//! * [`analyze`] — trajectory verdicts: decay verification, blowup detection,
//!   ground-state solving, and ω-limit checks.

pub mod analyze;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod grid;
pub mod nfunc;

pub use error::{Error, Result};
