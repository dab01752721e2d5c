//! Monte Carlo harness for the VLC indoor positioning models in `vlc-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod model;
pub mod seed;

pub use error::{SimError, SimResult};
