//! Command-line driver for the minimal-exposure-path solver.
//!
//! The pieces: [`scenario`] defines the TOML problem documents,
//! [`run`] drives grid construction / solve / path extraction and emits
//! plot-ready CSVs, [`oracle`] cross-checks exposures with an independent
//! lattice shortest-path method, and [`benchmark`] batches scenarios and
//! compares them against reference exposures.

pub mod benchmark;
pub mod export;
pub mod oracle;
pub mod run;
pub mod scenario;
