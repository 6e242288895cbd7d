//! File formats, reports and the `grect` command-line front end for
//! `grect-core`.
//!
//! A run reads one JSON configuration (unknown keys are rejected), executes
//! `solve`, `check`, `lln` or `bench`, and writes its artifacts atomically
//! into an output directory. Reals in machine output use twelve significant
//! digits in scientific notation.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod model;
pub mod output;

pub use grect_core as core;
