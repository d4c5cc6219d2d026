//! Allocation-only building blocks for discussion cascade analytics.
//!
//! Everything in this crate is pure computation over in-memory values: cascade
//! assembly from thread events, structural and temporal indicators, empirical
//! distribution tools, lexicon affect scoring, collapsed Gibbs LDA, comment
//! network percolation, and a random-forest evaluation harness. File formats,
//! dump parsing and the command line live in the `cascadekit` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cascade;
pub mod classify;
mod error;
pub mod event;
pub mod network;
pub mod rng;
pub mod sources;
pub mod stats;
pub mod text;
pub mod time;
pub mod topics;

pub use error::{Error, Result};
