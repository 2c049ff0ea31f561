//! Library side of the `skaudit` command: config parsing, sweeps, the
//! inequality suite and SVG plots.

pub mod audit;
pub mod config;
pub mod error;
pub mod plot;
pub mod sweep;
pub mod verify;
