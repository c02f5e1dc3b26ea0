//! Key quantities of finite irreducible discrete-time Markov chains --
//! stationary distributions, mean first passage times, second moments and
//! variances of first passage times, and expected occupation times -- all
//! computed through generalized inverses of the singular kernel I - P.
//!
//! The entry points are:
//!
//! - [`chain::TransitionMatrix`]: validated row-stochastic irreducible input.
//! - [`ginv`]: build, profile, classify and convert g-inverses of I - P.
//! - [`stationary`]: every route from a g-inverse to the stationary vector.
//! - [`passage`]: mean first passage times, second moments, variances.
//! - [`occupation`]: expected visit counts over a finite horizon.
//! - [`oracle`]: independent brute-force and Monte Carlo ground truth used to
//!   cross-validate the closed forms.
//!
//! All state indices in public interfaces are 1-based, matching the standard
//! notation for chains on {1, ..., m}.

#![forbid(unsafe_code)]

pub mod chain;
pub mod error;
pub mod ginv;
pub mod linalg;
pub mod occupation;
pub mod oracle;
pub mod passage;
pub mod stationary;

pub use chain::{StationaryVector, TransitionMatrix};
pub use error::{Error, Result};
pub use ginv::{ConditionProfile, GInvParams, GInvRecipe, GInverse};
pub use linalg::{Matrix, Vector};
