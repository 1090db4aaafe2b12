//! Library side of the 3HAN command-line pipeline: configuration
//! resolution, the subcommand implementations, and heatmap rendering.

pub mod commands;
pub mod config;
pub mod heatmap;
