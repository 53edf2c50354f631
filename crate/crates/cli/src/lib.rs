//! Command-line driver: experiment configs, the subcommands, trajectory
//! files and SVG plots.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod plot;
