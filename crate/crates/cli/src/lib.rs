//! Companion crate of `contact-amg`: MatrixMarket IO, the experiment
//! configuration format, CSV reports and the experiment drivers behind the
//! `contact-amg` binary.

pub mod config;
pub mod experiments;
pub mod mtx;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, PreconditionerKind};
