//! Command line and HTTP front ends for the `alphappp` discovery library.

pub mod cli;
pub mod pipeline;
pub mod service;

pub use cli::{run, Cli, CliError, RunSummary};
pub use pipeline::Algorithm;
