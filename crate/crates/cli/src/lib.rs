//! Library side of the `lgfmo` command: configuration and experiment
//! dispatch. The binary only parses arguments and maps errors to exit codes.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, DtSource, Experiment, GridSpec, RunConfig};
pub use run::{execute, load_hamiltonian, CliError, Output};
