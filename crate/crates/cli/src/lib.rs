//! Command-line front end: config parsing, L-function families, commands and self-tests.

pub mod commands;
pub mod config;
pub mod family;
pub mod output;
pub mod selftest;

pub use commands::{exit_code, run, Command, Invocation, Outcome};
