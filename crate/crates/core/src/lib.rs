//! Forward-backward ("past state") smoothing for a projectively and
//! continuously measured qubit.
//!
//! The crate computes filtered density matrices ρ(t), retrodictive effect
//! matrices E(t), the smoothed outcome probabilities that follow from the
//! pair, and the rival prediction obtained by treating smoothed populations
//! as a classical mixture. The [`lab`] module runs Monte Carlo versions of
//! the corresponding experiments so the two predictions can be tested
//! against simulated frequencies.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod readout;
pub mod retrodiction;
pub mod states;

pub use error::{Error, Result};
