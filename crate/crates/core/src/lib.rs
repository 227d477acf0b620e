//! Online learning of margin halfspaces under Massart label noise, and the
//! k-arm contextual bandit learner for monotone rewards built on top of it.
//!
//! The halfspace learner runs online gradient descent on a Leaky-ReLU
//! surrogate that is reweighted by the current hypothesis' margin. The bandit
//! learner feeds debiased pairwise reward differences into a generalisation of
//! the same loss.
//!
//! Module map:
//! - [`config`]: configuration, parameter schedules and the seeded RNG contract.
//! - [`types`]: domain vectors (weights, labelled rounds, contexts, rewards).
//! - [`losses`]: Leaky-ReLU, `C_Δ`, the reweighted round loss and the k-arm loss `G`.
//! - [`optimizer`]: projected online gradient descent on a Euclidean ball.
//! - [`halfspace`]: the Massart halfspace learner.
//! - [`bandit`]: the monotone-reward bandit learner.
//! - [`environments`]: adversaries, label channels and reward families.
//! - [`harness`]: experiment runners, oracle checks, baselines and serialization.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod config;
pub mod environments;
mod error;
pub mod halfspace;
pub mod harness;
pub mod losses;
pub mod optimizer;
pub mod types;
pub mod vector;

pub use error::{Error, Result};
