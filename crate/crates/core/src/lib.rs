//! Theta functions of order four.
//!
//! - [`char2`]: theta characteristics, parity, Weil pairing and the 2-torsion action.
//! - [`mmatrix`]: the sign matrix `M` over even pairs and its exact inverse.
//! - [`theta_eval`]: truncated lattice sums for theta functions with characteristics.
//! - [`identities`]: Riemann's quartic relation and its inversion, checked numerically.
//! - [`basis_analysis`]: evaluation matrices at 2-torsion points, fourth-power ranks
//!   and vanishing theta-nulls.
//! - [`cli`]: JSON I/O, corpus runner and reports behind the `theta4` binary.

pub mod basis_analysis;
pub mod char2;
pub mod cli;
pub mod error;
pub mod identities;
pub mod mmatrix;
pub mod theta_eval;

pub use error::{Error, Result};
