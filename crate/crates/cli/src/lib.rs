//! Scenario files, built-in examples and the `sheafcoord` subcommands.

pub mod builtin;
pub mod commands;
pub mod error;
pub mod scenario;
pub mod trace_io;

pub use error::CliError;
pub use scenario::Scenario;
