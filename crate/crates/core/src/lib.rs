//! Weighted conformal prediction for data collected by a learning agent in a
//! feedback loop.
//!
//! The crate is organized bottom-up:
//!
//! * [`data`] and [`quantile`]: labeled points, bags, and the weighted
//!   conservative quantile.
//! * [`weights`]: conformal weights (permutation oracle, exact multistep
//!   feedback covariate shift weights, d-step recursive estimate).
//! * [`predictors`]: ridge and Gaussian-process regressors.
//! * [`conformal`]: split and full prediction sets plus the baselines.
//! * [`agents`]: softmax and bounded query distributions over a finite pool.
//! * [`sim`]: synthetic pools, the design and active-learning loops, and
//!   aggregation.
//! * [`report`]: CSV and manifest serialization.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod conformal;
pub mod data;
pub mod error;
pub mod numeric;
pub mod predictors;
pub mod quantile;
pub mod report;
pub mod sim;
pub mod weights;

pub use data::{Bag, Extended, LabeledPoint, PredictionInterval};
pub use error::{Error, Result};
