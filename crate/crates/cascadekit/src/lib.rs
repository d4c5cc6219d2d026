//! Dump ingestion, file formats, parallel drivers and the command line for
//! discussion-cascade analytics. The algorithms live in `cascadekit-core`.

pub mod cli;
pub mod dump;
pub mod events;
pub mod formats;
pub mod ops;
pub mod parallel;
pub mod pipeline;
pub mod tables;

pub use cascadekit_core as core;
