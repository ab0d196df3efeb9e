//! Configuration files, CSV/JSON formats, a rayon-backed replicate executor
//! and the subcommands of the `fpoly` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;

pub use error::CliError;
