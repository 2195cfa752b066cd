//! Gloss perception toolkit: procedural stimulus rendering, automatic
//! weak-label metrics, a small trainable regressor, and the evaluation
//! harness that ties them together.

pub mod error;
pub mod stimulus;

pub use error::{Error, Result};
