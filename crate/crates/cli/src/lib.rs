//! Configuration, result export and subcommands for the `clustersim` tool.

pub mod commands;
pub mod config;
pub mod output;
