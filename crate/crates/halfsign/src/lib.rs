//! Exact arithmetic for sign and non-vanishing experiments on coefficient
//! families attached to half-integral weight eigenforms.
//!
//! The crate is organised as a pipeline:
//!
//! * [`arithfn`] - factor sieves, exact coefficient tables, Dirichlet
//!   convolution and Moebius inversion, Kronecker symbols.
//! * [`eigenform`] - integral-weight eigenvalue tables: the built-in
//!   weight-12 discriminant form and synthetic tables driven by the Hecke
//!   three-term recurrence.
//! * [`shimura`] - the divisor-sum correspondence between half-integral
//!   coefficients and their integral-weight lifts, sign statistics, first
//!   negative index, vanishing gaps, and local factor diagnostics.
//! * [`dickman`] - the smooth-number density function, its delay
//!   differential equation solver, and the crossover constant `kappa`.
//! * [`friable`] - counts of square-free friable integers coprime to a
//!   modulus, with density predictions.
//! * [`hsummatory`] - the banded auxiliary multiplicative function `h`, the
//!   log-weighted summatory function, and deconvolution diagnostics.
//! * [`bfree`] - sieves for integers free of a set of pairwise coprime
//!   moduli, including the set derived from vanishing coefficients.
//! * [`acceptance`] - the self-contained acceptance suite run both by
//!   `cargo test` and by the CLI.
//!
//! All coefficient identities are checked in exact integer arithmetic at the
//! "cleared" scaling (the integer table `A(n)`); floating point appears only
//! in density solvers and report layers.

// Divisibility tests are written as `n % d == 0` throughout: every divisor
// is nonzero by construction and the modulo form mirrors the identities the
// code implements. Range guards follow the same convention.
#![allow(clippy::manual_is_multiple_of, clippy::manual_range_contains)]

pub mod acceptance;
pub mod arithfn;
pub mod bfree;
pub mod dickman;
pub mod eigenform;
pub mod friable;
pub mod hsummatory;
pub mod shimura;

pub use arithfn::{kronecker, ArithError, CoefficientTable, FactorSieve};
pub use dickman::DickmanTable;
pub use eigenform::{delta_coefficients, EigenvalueTable, LiftBackend};
pub use shimura::{halfintegral_coefficients, FormInstance, HalfIntegralTable};
