//! Phase-space consistency checks for separable augmented densities
//! N(Ψ, r²) = P(Ψ) R(r²) of spherical stellar systems.
//!
//! The crate is organised bottom-up:
//! * [`specfun`]: gamma family and the generalized Mittag-Leffler function;
//! * [`expr`]: a small differentiable expression language;
//! * [`quadrature`]: Gauss–Jacobi / Gauss–Legendre rules and adaptive drivers;
//! * [`fracops`]: Riemann–Liouville integrals and derivatives;
//! * [`cmcheck`]: complete-monotonicity tests and Post–Widder inversion;
//! * [`admodels`]: radial models R(x) and their derivative sequences;
//! * [`consistency`]: necessary and sufficient criteria, three-valued verdicts;
//! * [`dfinversion`]: Eddington-type inversion, moments and quadrature oracles;
//! * [`report`]: deterministic JSON and CSV output;
//! * [`cli`]: the command-line front end.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod admodels;
pub mod cli;
pub mod cmcheck;
pub mod consistency;
pub mod dfinversion;
pub mod error;
pub mod expr;
pub mod fracops;
pub mod numerics;
pub mod quadrature;
pub mod report;
pub mod specfun;

pub use error::{Error, Result};
