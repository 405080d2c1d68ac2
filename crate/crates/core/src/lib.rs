//! Simulation of pre- and post-selected quantum systems.
//!
//! The crate is layered bottom-up:
//!
//! * [`hilbert`]: labeled product spaces, kets, dense operators, Schmidt analysis.
//! * [`tsvf`]: two-state vectors, post-selection and weak values.
//! * [`pointer`]: von Neumann pointer coupling from weak to projective measurement.
//! * [`scenarios`]: the built-in interferometer and collision experiments.
//! * [`dsl`]: the `.scn` scenario description format (parse, render, evaluate).
//! * [`report`]: table, CSV and JSONL emission of scenario results.
//! * [`acceptance`]: the reproduction checks run by `oblivion check`.

pub mod acceptance;
pub mod dsl;
pub mod error;
pub mod hilbert;
pub mod pointer;
pub mod report;
pub mod scenarios;
pub mod tsvf;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default RNG seed used by the CLI and Monte Carlo scenarios.
pub const DEFAULT_SEED: u64 = 42;
