//! File formats, benchmark runner and CLI support for `diffgsp-core`.

pub mod bench;
pub mod config;
pub mod data;
pub mod error;
pub mod export;

pub use diffgsp_core as core;
pub use error::{Error, Result};
