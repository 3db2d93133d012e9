//! Tweet normalization and gender-polarity ablation toolkit.
//!
//! This crate is `no_std` (it needs `alloc`) and does no I/O: file formats
//! for corpora, models and reports live in the `polarity` companion crate.
//!
//! The pipeline, in order:
//!
//! * [`literal`] turns stored `b'...'` bytes literals into text,
//! * [`cleaner`] drops retweets and applies mention, emoji and emoticon
//!   handling using the tables in [`emoji`],
//! * [`dataset`] splits records into training and validation sets and
//!   checks that both look alike,
//! * [`classifier`] trains a hashed n-gram logistic model,
//! * [`metrics`] and [`emotion`] score and describe its predictions,
//! * [`ablation`] runs all of the above over the mention × emoji grid, and
//!   [`synth`] generates planted-signal corpora to run it on.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ablation;
pub mod classifier;
pub mod cleaner;
pub mod dataset;
pub mod emoji;
pub mod emotion;
pub mod literal;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod text;
