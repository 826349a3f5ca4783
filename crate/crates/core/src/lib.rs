// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of probe decoherence against non-linear thermal baths.
//!
//! Two bath models are implemented side by side:
//!
//! * a classical one-dimensional particle in the rescaled double-well
//!   potential V(x) = -x²/2 + x⁴/4, damped and thermally driven
//!   ([`langevin`]), whose position dephases a two-level probe
//!   ([`dephasing`]) at a rate set by the zero-frequency bath spectrum
//!   ([`spectral`]);
//! * a two-level system relaxing under a Lindblad master equation
//!   (the low-temperature limit of the double well), exchanging
//!   excitations with a resonant two-level probe ([`spinboson`],
//!   built on the dense matrix kernel in [`quantum`]).
//!
//! In both models the bath is non-linear, so its spectral profile
//! reshapes with temperature and the probe decoherence rate *decreases*
//! as the bath gets hotter. The crate exposes the estimators needed to
//! measure that effect: spectrum and correlation-time estimation,
//! coherence-decay fitting, two-time correlations via the quantum
//! regression theorem, and the closed-form rates they are checked
//! against.
//!
//! All ensemble simulations are bit-reproducible: every realization
//! draws from its own counter-based RNG stream derived from a master
//! seed, so results are independent of thread count and execution
//! order.

// Validation uses `!(x > 0.0)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dephasing;
pub mod langevin;
pub mod quantum;
pub mod spectral;
pub mod spinboson;

/// Errors shared across the simulation modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "ensemble of {n_realizations} realizations x {points} recorded points \
         ({bytes} bytes) exceeds the memory budget of {budget} bytes"
    )]
    CapacityExceeded {
        n_realizations: usize,
        points: usize,
        bytes: usize,
        budget: usize,
    },

    #[error("need at least {needed} realizations, got {got}")]
    TooFewRealizations { needed: usize, got: usize },

    #[error("ensemble carries no recorded probe phases")]
    MissingPhases,

    #[error("series never decays below {threshold} of its initial value; increase t_max or the probe coupling")]
    InsufficientDecay { threshold: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state invariant breach at t = {time}: {what}")]
    IntegrationFailure { time: f64, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
