//! Files and command-line front end for `qrng-core`: JSON and CSV formats,
//! run configurations, manifests and the `qrng` subcommands.

#![forbid(unsafe_code)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod ingest;
pub mod manifest;
pub mod report;

pub use error::{AppError, Result};
