//! Adaptive filtering by online maximum-likelihood estimation.
//!
//! This crate implements the genie-aided online block maximum likelihood
//! (GA-OBML) and incremental maximum likelihood (GA-IML) update rules, their
//! practical variants driven by delay-and-extrapolate misalignment estimation,
//! and the classical baselines they are measured against (LMS, NLMS,
//! regularized APA, RLS). It also provides deterministic evaluators for the
//! analytical convergence bounds of the block-ML recursion and a seeded
//! Monte-Carlo harness for echo-cancellation style experiments.
//!
//! The crate is organized as:
//!
//! - [`state`]: channels, sliding data windows, filter state, misalignment
//!   metrics.
//! - [`linalg`]: small dense symmetric solves (Cholesky, Jacobi eigen,
//!   pseudo-inverse) used by every update rule.
//! - [`filters`]: the update rules behind the [`filters::AdaptiveFilter`]
//!   trait.
//! - [`confidence`]: strategies producing the confidence parameter `c_t`.
//! - [`theory`]: bound recursions, offline lower bounds, the offline
//!   regularized least-squares reference estimator, and singular-value
//!   concentration bounds.
//! - [`harness`]: input/channel generators, SNR calibration, trial execution
//!   and averaging.
//! - [`wav`]: a minimal PCM/float WAV reader for audio input sources.

pub mod confidence;
pub mod error;
pub mod filters;
pub mod harness;
pub mod linalg;
pub mod selftest;
pub mod state;
pub mod theory;
pub mod wav;

pub use error::{Error, Result};
pub use state::{Channel, DataWindow, FilterState, ObservationModel, DB_FLOOR};
