//! Fraud-detection models and model-agnostic feature attribution.
//!
//! This crate holds the algorithmic half of `fraudex`:
//!
//! - [`data`]: encoding of mixed numeric/categorical transaction records,
//!   stratified splits, and a synthetic generator with known ground truth.
//! - [`models`]: eight trainable scorers (Naive Bayes, logistic regression,
//!   CART, random forest, gradient boosting, MLP, autoencoder, isolation
//!   forest), all exposed as a [`models::ScoreFunction`].
//! - [`metrics`]: precision / recall / F1 and rank-based AUC.
//! - [`explain`]: KernelSHAP with configurable background datasets, LIME,
//!   and an exact Shapley oracle.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Everything here is deterministic given explicit seeds; file
//! formats, timing and the CLI live in the companion `fraudex` crate.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod explain;
pub mod linalg;
pub mod math;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::Matrix;
