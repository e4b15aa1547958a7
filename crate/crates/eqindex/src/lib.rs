//! Spectral Dirac models, scenario files and the acceptance runner built on
//! `eqindex-core`.

pub mod acceptance;
pub mod error;
pub mod report;
pub mod scenario;
pub mod spectral_models;

pub use error::{ModelError, Result};
