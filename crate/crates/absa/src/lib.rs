//! Attention-supervised aspect-based sentiment classification.
//!
//! The library trains a small attentional memory-network classifier that
//! predicts the sentiment of a sentence toward a given aspect term, then
//! improves it with self-supervised attention learning:
//!
//! 1. train a baseline classifier;
//! 2. iteratively mine *attention supervision words* — for each training
//!    sentence, find the most influential context word, record whether it
//!    supported or misled the current prediction, mask it, and continue
//!    training so less obvious words can surface ([`mining`]);
//! 3. retrain from scratch with a regularizer that pushes attention toward
//!    the mined active words and away from the misleading ones
//!    ([`training`]).
//!
//! Influence is measured either by raw attention weights or by a
//! noise-averaged gradient×input attribution ([`saliency`]). Everything is
//! deterministic under a seed, from data splits to checkpoint bytes.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod mining;
pub mod model;
pub mod numerics;
pub mod saliency;
pub mod training;

pub use error::{Error, Result};
