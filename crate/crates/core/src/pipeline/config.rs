//! Pipeline configuration: which degradation types are enabled, their
//! inclusion probabilities and parameter ranges, order policy, clamping
//! policy, parameter scope, and the master seed.
//!
//! The on-disk form is versioned JSON with unknown keys rejected. Types
//! absent from `degradations` are disabled.

use crate::error::{Error, Result};
use crate::isp::DEFAULT_CCM;
use crate::kernels::KernelRanges;
use serde::{Deserialize, Serialize};

/// Degradation type tags in the canonical fixed order used when shuffling
/// is disabled: the two blurs first, then noise sources, then compression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradationKind {
    Blur,
    Resize,
    Gaussian,
    Poisson,
    Speckle,
    Isp,
    Jpeg,
    Video,
}

impl DegradationKind {
    pub const CANONICAL: [DegradationKind; 8] = [
        DegradationKind::Blur,
        DegradationKind::Resize,
        DegradationKind::Gaussian,
        DegradationKind::Poisson,
        DegradationKind::Speckle,
        DegradationKind::Isp,
        DegradationKind::Jpeg,
        DegradationKind::Video,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DegradationKind::Blur => "blur",
            DegradationKind::Resize => "resize",
            DegradationKind::Gaussian => "gaussian",
            DegradationKind::Poisson => "poisson",
            DegradationKind::Speckle => "speckle",
            DegradationKind::Isp => "isp",
            DegradationKind::Jpeg => "jpeg",
            DegradationKind::Video => "video",
        }
    }

    /// Stable id used for sub-stream derivation.
    pub fn id(self) -> u64 {
        Self::CANONICAL.iter().position(|k| *k == self).unwrap() as u64
    }
}

/// Whether degradation parameters are drawn once per clip or per frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamScope {
    PerClip,
    PerFrame,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlurConfig {
    pub probability: f64,
    pub kernel: KernelRanges,
}

impl Default for BlurConfig {
    fn default() -> Self {
        BlurConfig {
            probability: 1.0,
            kernel: KernelRanges::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResizeConfig {
    pub probability: f64,
    pub scale: [f64; 2],
    /// Probabilities for bilinear, area, bicubic.
    pub mode_probs: [f64; 3],
}

impl Default for ResizeConfig {
    fn default() -> Self {
        ResizeConfig {
            probability: 1.0,
            scale: [0.5, 2.0],
            mode_probs: [1.0 / 3.0; 3],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussianConfig {
    pub probability: f64,
    /// Sigma range on the 0-255 scale.
    pub sigma: [f64; 2],
    /// Probability of the channel-replicated gray-scale variant.
    pub grayscale_prob: f64,
}

impl Default for GaussianConfig {
    fn default() -> Self {
        GaussianConfig {
            probability: 1.0,
            sigma: [2.0, 50.0],
            grayscale_prob: 0.4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoissonConfig {
    pub probability: f64,
    /// log10 photon-scale exponent range.
    pub alpha: [f64; 2],
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig {
            probability: 1.0,
            alpha: [2.0, 4.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeckleConfig {
    pub probability: f64,
    /// Level range on the 0-255 scale.
    pub level: [f64; 2],
    /// Probability of the channel-replicated variant.
    pub grayscale_prob: f64,
}

impl Default for SpeckleConfig {
    fn default() -> Self {
        SpeckleConfig {
            probability: 1.0,
            level: [0.0, 50.0],
            grayscale_prob: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IspConfig {
    pub probability: f64,
    /// Shot gain bounds; sampled log-uniformly.
    pub shot_gain: [f64; 2],
    /// Read-noise sigma bounds; sampled log-uniformly.
    pub read_sigma: [f64; 2],
    pub wb_red: [f64; 2],
    pub wb_blue: [f64; 2],
    /// Fixed color correction matrix (rows sum to 1).
    pub ccm: [[f64; 3]; 3],
}

impl Default for IspConfig {
    fn default() -> Self {
        IspConfig {
            probability: 1.0,
            shot_gain: [1e-4, 1e-2],
            read_sigma: [1e-3, 1e-2],
            wb_red: [1.2, 2.4],
            wb_blue: [1.2, 2.4],
            ccm: DEFAULT_CCM,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JpegConfig {
    pub probability: f64,
    /// Inclusive quality bounds.
    pub quality: [u8; 2],
    /// Probability of 4:2:0 chroma decimation (else 4:4:4).
    pub subsample_420_prob: f64,
}

impl Default for JpegConfig {
    fn default() -> Self {
        JpegConfig {
            probability: 1.0,
            quality: [30, 95],
            subsample_420_prob: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VideoConfig {
    pub probability: f64,
    pub backend: crate::codec::CodecBackend,
    /// Bitrate bounds in bits/s.
    pub bitrate: [f64; 2],
    /// Codec names offered to the external backend.
    pub codecs: Vec<String>,
}

impl Default for VideoConfig {
    fn default() -> Self {
        VideoConfig {
            probability: 1.0,
            backend: crate::codec::CodecBackend::Builtin,
            bitrate: [1e4, 1e5],
            codecs: crate::codec::EXTERNAL_CODECS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

/// Per-type sections; a missing section disables that type.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradationSet {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blur: Option<BlurConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resize: Option<ResizeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisson: Option<PoissonConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speckle: Option<SpeckleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isp: Option<IspConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jpeg: Option<JpegConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub video: Option<VideoConfig>,
}

/// Supported config schema version.
pub const CONFIG_VERSION: u32 = 1;

/// Full pipeline configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub seed: u64,
    /// Randomize the stage order per plan; otherwise the canonical order.
    pub shuffle: bool,
    /// Clamp to [0,1] after every stage; otherwise only at the end.
    pub clamp_each_stage: bool,
    pub param_scope: ParamScope,
    pub degradations: DegradationSet,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            seed: 0,
            shuffle: true,
            clamp_each_stage: true,
            param_scope: ParamScope::PerClip,
            degradations: DegradationSet {
                blur: Some(BlurConfig::default()),
                resize: Some(ResizeConfig::default()),
                gaussian: Some(GaussianConfig::default()),
                poisson: Some(PoissonConfig::default()),
                speckle: Some(SpeckleConfig::default()),
                isp: Some(IspConfig::default()),
                jpeg: Some(JpegConfig::default()),
                video: Some(VideoConfig::default()),
            },
        }
    }
}

impl PipelineConfig {
    /// Enabled kinds in canonical order.
    pub fn enabled_kinds(&self) -> Vec<DegradationKind> {
        let d = &self.degradations;
        DegradationKind::CANONICAL
            .iter()
            .copied()
            .filter(|k| match k {
                DegradationKind::Blur => d.blur.is_some(),
                DegradationKind::Resize => d.resize.is_some(),
                DegradationKind::Gaussian => d.gaussian.is_some(),
                DegradationKind::Poisson => d.poisson.is_some(),
                DegradationKind::Speckle => d.speckle.is_some(),
                DegradationKind::Isp => d.isp.is_some(),
                DegradationKind::Jpeg => d.jpeg.is_some(),
                DegradationKind::Video => d.video.is_some(),
            })
            .collect()
    }

    pub fn inclusion_probability(&self, kind: DegradationKind) -> f64 {
        let d = &self.degradations;
        match kind {
            DegradationKind::Blur => d.blur.as_ref().map(|c| c.probability),
            DegradationKind::Resize => d.resize.as_ref().map(|c| c.probability),
            DegradationKind::Gaussian => d.gaussian.as_ref().map(|c| c.probability),
            DegradationKind::Poisson => d.poisson.as_ref().map(|c| c.probability),
            DegradationKind::Speckle => d.speckle.as_ref().map(|c| c.probability),
            DegradationKind::Isp => d.isp.as_ref().map(|c| c.probability),
            DegradationKind::Jpeg => d.jpeg.as_ref().map(|c| c.probability),
            DegradationKind::Video => d.video.as_ref().map(|c| c.probability),
        }
        .unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} unsupported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let enabled = self.enabled_kinds();
        if enabled.is_empty() {
            return Err(Error::Config("no degradation types enabled".into()));
        }
        for kind in &enabled {
            let p = self.inclusion_probability(*kind);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "inclusion probability {p} for {} outside [0,1]",
                    kind.name()
                )));
            }
        }
        let d = &self.degradations;
        if let Some(c) = &d.blur {
            c.kernel.validate()?;
        }
        if let Some(c) = &d.resize {
            check_range("resize.scale", c.scale, 0.0)?;
            if c.mode_probs.iter().any(|p| *p < 0.0) || c.mode_probs.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config("resize.mode_probs invalid".into()));
            }
        }
        if let Some(c) = &d.gaussian {
            check_range_nonneg("gaussian.sigma", c.sigma)?;
            check_prob("gaussian.grayscale_prob", c.grayscale_prob)?;
        }
        if let Some(c) = &d.poisson {
            if c.alpha[0] > c.alpha[1] {
                return Err(Error::Config("poisson.alpha bounds reversed".into()));
            }
        }
        if let Some(c) = &d.speckle {
            check_range_nonneg("speckle.level", c.level)?;
            check_prob("speckle.grayscale_prob", c.grayscale_prob)?;
        }
        if let Some(c) = &d.isp {
            check_range("isp.shot_gain", c.shot_gain, 0.0)?;
            check_range("isp.read_sigma", c.read_sigma, 0.0)?;
            check_range("isp.wb_red", c.wb_red, 0.0)?;
            check_range("isp.wb_blue", c.wb_blue, 0.0)?;
            for row in &c.ccm {
                if (row.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
                    return Err(Error::Config("isp.ccm rows must sum to 1".into()));
                }
            }
        }
        if let Some(c) = &d.jpeg {
            if c.quality[0] == 0 || c.quality[1] > 100 || c.quality[0] > c.quality[1] {
                return Err(Error::Config("jpeg.quality bounds invalid".into()));
            }
            check_prob("jpeg.subsample_420_prob", c.subsample_420_prob)?;
        }
        if let Some(c) = &d.video {
            check_range("video.bitrate", c.bitrate, 0.0)?;
            if c.backend == crate::codec::CodecBackend::External && c.codecs.is_empty() {
                return Err(Error::Config("video.codecs empty for external backend".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }
}

fn check_range(name: &str, r: [f64; 2], min_exclusive: f64) -> Result<()> {
    if !(r[0] <= r[1] && r[0] > min_exclusive && r.iter().all(|v| v.is_finite())) {
        return Err(Error::Config(format!("{name} bounds invalid: {r:?}")));
    }
    Ok(())
}

fn check_range_nonneg(name: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0] <= r[1] && r[0] >= 0.0 && r.iter().all(|v| v.is_finite())) {
        return Err(Error::Config(format!("{name} bounds invalid: {r:?}")));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} = {p} outside [0,1]")));
    }
    Ok(())
}
