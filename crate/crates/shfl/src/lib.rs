//! Configuration, file formats and experiment orchestration around
//! [`shfl_core`]. The `shfl` binary exposes these as subcommands.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;

pub use config::{load_config, parse_config, RunConfig};
pub use error::{Error, Result};
