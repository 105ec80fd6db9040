//! Seeded synthesis of realistically degraded video clips.
//!
//! A clip is degraded by a randomly shuffled composition of up to eight
//! degradation types — Gaussian, Poisson, speckle and camera-sensor noise,
//! JPEG and video compression, kernel blur and resizing blur — each with
//! parameters drawn from configurable ranges. Everything is deterministic
//! under a `(seed, stream)` addressing scheme, and every run can be replayed
//! bit-exactly from its manifest.
//!
//! The [`analysis`] and [`theorem`] modules quantify the model's statistical
//! behavior: how downscaling reduces noise, how order shuffling widens the
//! degradation distribution, and how noise-augmented training relates to an
//! explicit regularizer.

pub mod analysis;
pub mod codec;
pub mod error;
pub mod fixtures;
pub mod frame;
pub mod isp;
pub mod kernels;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod plane;
pub mod resample;
pub mod rng;
pub mod stats;
pub mod theorem;

pub use error::{Error, Result};
pub use frame::{residual, Clip, Frame};
pub use rng::SeededRng;
pub use stats::{stats, ResidualStats};
