//! Offline P300 speller toolkit.
//!
//! - [`lm`]: layered smoothed character language model.
//! - [`flashboard`]: static and virtual 6x6 layouts, highlight groups, scan order.
//! - [`wordpred`]: best-first word completion and the external suggester client.
//! - [`swlda`]: feature extraction, stepwise LDA training and cross-validation.
//! - [`signal`]: Markov resampling of recorded flash scores.
//! - [`decoder`]: Bayesian posterior over board cells with dynamic stopping.
//! - [`sim`]: passage typing simulation, ITR / retry metrics and batch runs.

pub mod decoder;
pub mod error;
pub mod flashboard;
pub mod lm;
pub mod signal;
pub mod sim;
pub mod swlda;
pub mod synthetic;
pub mod wordpred;

pub use error::{Error, Result};
