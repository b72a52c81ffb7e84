//! Explicit Berry–Esseen bounds for smooth nonlinear statistics `f(S)` of
//! sums `S = Σ X_i` of independent random vectors.
//!
//! The crate is organised around a few layers:
//!
//! * [`dist`] and [`moments`] describe summand distributions and reduce them to
//!   the scalars (`s_α`, `‖V‖_α`, tail sums) the bounds need;
//! * [`bounds`] evaluates the uniform and non-uniform bound expressions term by
//!   term, modulo the unspecified absolute constants;
//! * [`statistics`] builds the Student, Pearson and Hotelling models with their
//!   linearizations and degeneracy checks;
//! * [`concentration`] holds the exactly checkable inequality devices;
//! * [`simulation`] measures true distances by Monte Carlo and fits rates;
//! * [`config`] and [`cli`] drive all of the above from a TOML file, and
//!   [`verify`] bundles the property suites behind the `verify` command.

pub mod bounds;
pub mod cli;
pub mod concentration;
pub mod config;
pub mod dist;
pub mod error;
pub mod family;
pub mod moments;
pub mod report;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod statistics;
pub mod verify;

pub use dist::{sample, DistributionSpec, ExpectationMode};
pub use error::{Error, Result};
pub use moments::{moment_profile, tail_sum, Moment, MomentProfile};
