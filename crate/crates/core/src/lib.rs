//! Frequency-polygon density estimation for stationary random fields indexed
//! by the integer lattice `Z^d`.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece:
//!
//! * [`grid`]: lattice sites, observation regions and the two bin partitions
//!   used by the polygon (`I_k = [(k-1)b, kb)` and `J_k = [(k-1/2)b, (k+1/2)b)`).
//! * [`densities`]: target marginals with closed-form CDFs and quantiles.
//! * [`fields`]: seeded i.i.d. and m-dependent Gaussian moving-average fields
//!   with exact marginals and certified mixing bounds.
//! * [`estimator`]: histogram counts, the raw and normalized polygon, and the
//!   exact i.i.d. moment oracles.
//! * [`mixing`]: mixing-coefficient bound profiles, summability certificates
//!   and the blocking-sequence diagnostic.
//! * [`experiments`]: the Monte Carlo harness behind the variance limit and
//!   the multivariate CLT checks.
//!
//! File formats, configuration and the command-line front end live in the
//! `fpoly` crate.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod densities;
pub mod estimator;
pub mod experiments;
pub mod fields;
pub mod grid;
pub mod ks;
pub mod mixing;
pub mod normal;
pub mod quadrature;
pub mod rng;

mod error;
mod sum;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;
