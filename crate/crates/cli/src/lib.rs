//! Driver layer over `ks-core`: run configs, the binary trajectory format,
//! CSV and PPM outputs, and the subcommands of the `ks` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod render;
pub mod trajfile;

pub use config::{InitialData, RunConfig, REFERENCE_SEED};
