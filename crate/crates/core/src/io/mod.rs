//! Command line, configuration and file formats.

pub mod cli;
pub mod commands;
pub mod config;
pub mod formats;
pub mod plot;
pub mod table;

pub use cli::{parse_cli, Cli};
pub use commands::{execute, Outcome};
pub use config::{CommandKind, RunConfig, OUTPUT_ROOT_ENV};
pub use table::{read_csv, write_csv, Cell, Table};
