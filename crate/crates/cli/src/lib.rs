//! Experiment harness for the streaming CCA solver: configuration, data loading, and the
//! `run`, `exact`, `check-gradients` and `bench` commands behind the `cca` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod data;
pub mod error;
pub mod exact;
pub mod gradcheck;
pub mod run;

pub use config::{RunConfig, SourceSpec};
pub use error::CliError;

/// Formats a float with 17 significant digits, the precision used in every CSV output.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}
