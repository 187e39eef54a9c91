//! Discrepancy of finite point sets in `[0,1)^d`.
//!
//! * [`discrepancy`]: star and extreme (unanchored) L2 discrepancy, both in
//!   closed form and as truncated dyadic Haar series with a certified tail.
//! * [`bmo`]: certified lower bounds on the dyadic product BMO seminorm of the
//!   local discrepancy, and its exact value for the empty set.
//! * [`haar`]: the exact Haar coefficient engine the series evaluators share.
//! * [`oracle`]: brute-force references (cell integration, Monte Carlo).
//! * [`bounds`]: curse-of-dimensionality lower bounds for the inverse of
//!   these discrepancies, an empirical inverse search and Roth-type tables.
//! * [`verify`] and [`cli`]: the self-check suite and command-line front end.

pub mod bmo;
pub mod bounds;
pub mod cli;
pub mod discrepancy;
pub mod error;
pub mod haar;
pub mod oracle;
pub mod pointset;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use pointset::PointSet;
