//! Simulation core for an OFDM visible-light-communication system in which a
//! photodiode receiver locates itself in 3-D from per-LED received signal
//! strength.
//!
//! The crate is organised bottom-up:
//!
//! - [`scene`]: room, corner access points, pyramidal LED orientations, receiver pose.
//! - [`channel`]: Lambertian DC gain, received power, electric gain and the
//!   analytic gradient of each LED's gain with respect to receiver position.
//! - [`frontend`]: LED flux curve, conversion factor, predistortion, receiver
//!   noise variances and synthetic RSS observations.
//! - [`ofdm`]: spatial-optical OFDM framing, filter banks, unitary DFT pair,
//!   hard clipping, pilot demodulation and the clipping/capacity analytics.
//! - [`estimators`]: AoA, weighted AoA, Gauss-Newton RSS refinement, the hybrid
//!   locator and operation counts.

pub mod channel;
pub mod error;
pub mod estimators;
pub mod frontend;
pub mod linalg;
pub mod ofdm;
pub mod scene;

pub use error::{Error, Result};

/// 3-component real vector (positions in meters, versors unitless).
pub type Vec3 = nalgebra::Vector3<f64>;
