//! Exact computer algebra for microformal morphisms between supermanifolds.
//!
//! The crate is layered bottom-up: [`superalg`] supplies polynomials in
//! commuting and anticommuting variables with rational coefficients,
//! [`geometry`] adds charts, phase charts and formal coordinate changes,
//! [`microformal`] implements relations given by generating functions and
//! their nonlinear pullbacks, [`brackets`] the canonical Poisson and Schouten
//! brackets with higher derived brackets, and [`hamjac`] the Hamilton-Jacobi
//! shift operators. [`random`] holds seeded instance generators shared by the
//! test suites.

pub mod brackets;
pub mod error;
pub mod geometry;
pub mod hamjac;
pub mod microformal;
pub mod random;
pub mod superalg;

pub use error::{Error, Result};
pub use superalg::{Caps, Monomial, Parity, Rational, SuperPoly, Var, VarClass};
