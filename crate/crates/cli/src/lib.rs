//! Seeded experiment campaigns over the `sparse-rank` algorithms, with
//! JSON-lines and CSV output.

pub mod campaign;
pub mod commands;
pub mod config;
pub mod output;

pub use campaign::{Outcome, TrialRecord};
pub use config::{Command, ExperimentConfig, Format, Params};
