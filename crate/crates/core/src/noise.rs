//! Pixel-domain stochastic degradations: additive Gaussian (color or
//! gray-scale), Poisson shot noise, and multiplicative speckle.
//!
//! Noise levels quoted on the 0-255 scale are divided by 255 at application
//! time; outputs are returned unclamped.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

/// Additive white Gaussian noise parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianNoiseSpec {
    /// Standard deviation on the 0-255 scale.
    pub sigma_255: f64,
    /// One draw per pixel replicated across channels when true.
    pub grayscale: bool,
}

/// Poisson shot-noise parameters; `alpha` is the log10 photon-scale exponent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonNoiseSpec {
    pub alpha: f64,
}

/// Multiplicative speckle parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpeckleNoiseSpec {
    /// Noise std on the 0-255 scale, applied multiplicatively.
    pub level_255: f64,
    /// Replicate one draw across channels when true.
    #[serde(default)]
    pub grayscale: bool,
}

/// x + z with z ~ N(0, (sigma/255)^2), i.i.d. per channel, or per pixel
/// replicated across channels in grayscale mode.
pub fn add_gaussian(frame: &Frame, spec: &GaussianNoiseSpec, rng: &mut SeededRng) -> Result<Frame> {
    if !(spec.sigma_255.is_finite() && spec.sigma_255 >= 0.0) {
        return Err(Error::Argument("gaussian sigma must be non-negative".into()));
    }
    let sigma = spec.sigma_255 / 255.0;
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let mut out = frame.clone();
    let data = out.data_mut();
    if spec.grayscale {
        for px in data.chunks_exact_mut(3) {
            let z = (rng.normal() * sigma) as f32;
            for v in px {
                *v += z;
            }
        }
    } else {
        for v in data.iter_mut() {
            *v += (rng.normal() * sigma) as f32;
        }
    }
    Ok(out)
}

/// Poisson(10^alpha * x) / 10^alpha per sample. Residual variance at a clean
/// level x is x / 10^alpha.
pub fn add_poisson(frame: &Frame, spec: &PoissonNoiseSpec, rng: &mut SeededRng) -> Result<Frame> {
    if !spec.alpha.is_finite() {
        return Err(Error::Argument("poisson alpha must be finite".into()));
    }
    if frame.data().iter().any(|v| *v < 0.0) {
        return Err(Error::Argument(
            "poisson input has negative samples; clamp first".into(),
        ));
    }
    let scale = 10f64.powf(spec.alpha);
    let mut out = frame.clone();
    for v in out.data_mut() {
        *v = (rng.poisson(*v as f64 * scale) as f64 / scale) as f32;
    }
    Ok(out)
}

/// x + x .* z with z ~ N(0, (level/255)^2).
pub fn add_speckle(frame: &Frame, spec: &SpeckleNoiseSpec, rng: &mut SeededRng) -> Result<Frame> {
    if !(spec.level_255.is_finite() && spec.level_255 >= 0.0) {
        return Err(Error::Argument("speckle level must be non-negative".into()));
    }
    let sigma = spec.level_255 / 255.0;
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let mut out = frame.clone();
    let data = out.data_mut();
    if spec.grayscale {
        for px in data.chunks_exact_mut(3) {
            let z = (rng.normal() * sigma) as f32;
            for v in px {
                *v += *v * z;
            }
        }
    } else {
        for v in data.iter_mut() {
            *v += *v * (rng.normal() * sigma) as f32;
        }
    }
    Ok(out)
}
