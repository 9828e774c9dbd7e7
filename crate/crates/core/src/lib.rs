//! Largest-eigenvalue distribution of the Laguerre unitary ensemble.
//!
//! The crate evaluates `P(λ_max ≤ t)` exactly at finite `n`, the large-`n`
//! expansions of its logarithm, the Painlevé V structure of the associated
//! orthogonal-polynomial quantities, the Airy-kernel determinant that governs
//! the soft edge, and a Monte Carlo sampler for cross-checks.

pub mod airyfred;
pub mod asymptotics;
pub mod error;
pub mod exactprob;
pub mod mcsample;
pub mod orthopoly;
pub mod painleve;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
