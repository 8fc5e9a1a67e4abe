//! Simulation and certification of ensemble-average ("bulk") quantum
//! computation with thermal, partially mixed inputs.
//!
//! * [`qcore`]: dense states, gates, operators and Kraus channels for
//!   sites of any local dimension.
//! * [`oracle`]: truth tables, promise classification, enumeration, and
//!   the named oracle-source registry.
//! * [`models`]: the three execution models (single-shot sampling, ensemble
//!   average with pure inputs, ensemble average with thermal inputs) behind
//!   a common trait, and the Deutsch-Jozsa and parity pipelines.
//! * [`analysis`]: exhaustive and sampled worst-case gap scans and the
//!   brute-force identity checks.
//! * [`hqa`]: the channel-proportionality certifier.
//! * [`acceptance`]: the end-to-end criteria suite, shared by the test
//!   target and `bulkq selftest`.

pub mod acceptance;
pub mod analysis;
pub mod error;
pub mod hqa;
pub mod models;
pub mod oracle;
pub mod qcore;

pub use error::{Error, ErrorClass, Result};
