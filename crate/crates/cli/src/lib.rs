//! Std companion to `causal-ssl-core`: CSV datasets and partition files,
//! report rendering, a parallel benchmark runner, and the `causal-ssl` CLI.

pub mod csv_io;
pub mod error;
pub mod partition;
pub mod reference;
pub mod report;
pub mod runner;

pub use error::CliError;
pub use partition::PartitionConfig;
