//! File formats, manifests and the `mvcon` command-line driver for
//! [`mvcon_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod model;
pub mod output;

pub use error::{CliError, Result};
pub use manifest::{load_manifest, LoadedManifest, Manifest};
