//! Sampling, shuffling, and composing degradation sequences.
//!
//! A plan is one realized composition `g_{i1} o ... o g_{iN}`: each enabled
//! degradation type is included with its configured probability, its
//! parameters are drawn from the configured ranges, and the application order
//! is either the canonical fixed order or a uniformly random permutation.
//!
//! # Sub-stream discipline
//!
//! Every random decision draws from its own derived stream so that no choice
//! perturbs an unrelated one:
//!
//! ```text
//! root(seed)
//!   clip c                    -> child(c)
//!     inclusion decisions     -> child(LBL_INCLUDE)
//!     order permutation       -> child(LBL_ORDER)
//!     parameters of kind k    -> child(LBL_PARAM + k)   [.child(f) per frame]
//!     realization of kind k   -> child(LBL_APPLY + k).child(f) on frame f
//! ```
//!
//! Changing a parameter range therefore never changes the noise realization
//! of any other stage, and plan application consumes no sampling streams.

pub mod config;

pub use config::{DegradationKind, ParamScope, PipelineConfig};

use crate::codec::{
    jpeg_roundtrip, qp_from_bitrate, video_compress, ChromaSubsampling, CodecBackend, JpegSpec,
    VideoCodecSpec,
};
use crate::error::{Error, Result};
use crate::frame::{Clip, Frame};
use crate::isp::{processed_camera_noise, BayerPattern, IspNoiseSpec};
use crate::kernels::{convolve, make_kernel, sample_kernel_spec, KernelSpec};
use crate::noise::{
    add_gaussian, add_poisson, add_speckle, GaussianNoiseSpec, PoissonNoiseSpec, SpeckleNoiseSpec,
};
use crate::resample::{resizing_blur, ResizeMode, ResizeSpec};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

const LBL_INCLUDE: u64 = 0x01;
const LBL_ORDER: u64 = 0x02;
const LBL_PARAM: u64 = 0x100;
const LBL_APPLY: u64 = 0x200;

/// One sampled degradation instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DegradationSpec {
    Blur(KernelSpec),
    Resize(ResizeSpec),
    Gaussian(GaussianNoiseSpec),
    Poisson(PoissonNoiseSpec),
    Speckle(SpeckleNoiseSpec),
    Isp(IspNoiseSpec),
    Jpeg(JpegSpec),
    Video(VideoCodecSpec),
}

impl DegradationSpec {
    pub fn kind(&self) -> DegradationKind {
        match self {
            DegradationSpec::Blur(_) => DegradationKind::Blur,
            DegradationSpec::Resize(_) => DegradationKind::Resize,
            DegradationSpec::Gaussian(_) => DegradationKind::Gaussian,
            DegradationSpec::Poisson(_) => DegradationKind::Poisson,
            DegradationSpec::Speckle(_) => DegradationKind::Speckle,
            DegradationSpec::Isp(_) => DegradationKind::Isp,
            DegradationSpec::Jpeg(_) => DegradationKind::Jpeg,
            DegradationSpec::Video(_) => DegradationKind::Video,
        }
    }
}

/// Seed and stream identifiers a plan was sampled from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanProvenance {
    pub seed: u64,
    pub clip_stream: u64,
}

/// A realized degradation sequence for one clip.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelinePlan {
    /// Stages in application order.
    pub stages: Vec<DegradationSpec>,
    /// `stages[i]` came from position `order_permutation[i]` of the included
    /// kinds in canonical order; identity when shuffling is off.
    pub order_permutation: Vec<usize>,
    pub provenance: PlanProvenance,
}

impl PipelinePlan {
    pub fn order(&self) -> Vec<DegradationKind> {
        self.stages.iter().map(|s| s.kind()).collect()
    }
}

/// Root generator for a seed; clip `c` uses `root.child(c)`.
pub fn root_rng(seed: u64) -> SeededRng {
    SeededRng::new(seed, 0)
}

fn sample_spec_for(kind: DegradationKind, config: &PipelineConfig, rng: &mut SeededRng) -> DegradationSpec {
    let d = &config.degradations;
    match kind {
        DegradationKind::Blur => {
            let c = d.blur.as_ref().expect("blur enabled");
            DegradationSpec::Blur(sample_kernel_spec(rng, &c.kernel))
        }
        DegradationKind::Resize => {
            let c = d.resize.as_ref().expect("resize enabled");
            let scale = rng.uniform_range(c.scale[0], c.scale[1]);
            let mode = ResizeMode::ALL[rng.categorical(&c.mode_probs)];
            DegradationSpec::Resize(ResizeSpec { scale, mode })
        }
        DegradationKind::Gaussian => {
            let c = d.gaussian.as_ref().expect("gaussian enabled");
            DegradationSpec::Gaussian(GaussianNoiseSpec {
                sigma_255: rng.uniform_range(c.sigma[0], c.sigma[1]),
                grayscale: rng.bernoulli(c.grayscale_prob),
            })
        }
        DegradationKind::Poisson => {
            let c = d.poisson.as_ref().expect("poisson enabled");
            DegradationSpec::Poisson(PoissonNoiseSpec {
                alpha: rng.uniform_range(c.alpha[0], c.alpha[1]),
            })
        }
        DegradationKind::Speckle => {
            let c = d.speckle.as_ref().expect("speckle enabled");
            DegradationSpec::Speckle(SpeckleNoiseSpec {
                level_255: rng.uniform_range(c.level[0], c.level[1]),
                grayscale: rng.bernoulli(c.grayscale_prob),
            })
        }
        DegradationKind::Isp => {
            let c = d.isp.as_ref().expect("isp enabled");
            let log_uniform = |rng: &mut SeededRng, r: [f64; 2]| {
                (rng.uniform_range(r[0].ln(), r[1].ln())).exp()
            };
            DegradationSpec::Isp(IspNoiseSpec {
                bayer_pattern: BayerPattern::ALL[rng.gen_index(4)],
                shot_gain: log_uniform(rng, c.shot_gain),
                read_sigma: log_uniform(rng, c.read_sigma),
                wb_gains: (
                    rng.uniform_range(c.wb_red[0], c.wb_red[1]),
                    rng.uniform_range(c.wb_blue[0], c.wb_blue[1]),
                ),
                ccm: c.ccm,
            })
        }
        DegradationKind::Jpeg => {
            let c = d.jpeg.as_ref().expect("jpeg enabled");
            let span = (c.quality[1] - c.quality[0]) as usize + 1;
            DegradationSpec::Jpeg(JpegSpec {
                quality: c.quality[0] + rng.gen_index(span) as u8,
                chroma_subsampling: if rng.bernoulli(c.subsample_420_prob) {
                    ChromaSubsampling::Half
                } else {
                    ChromaSubsampling::Full
                },
            })
        }
        DegradationKind::Video => {
            let c = d.video.as_ref().expect("video enabled");
            let bitrate = rng.uniform_range(c.bitrate[0], c.bitrate[1]);
            let codec_name = match c.backend {
                CodecBackend::Builtin => String::new(),
                CodecBackend::External => c.codecs[rng.gen_index(c.codecs.len())].clone(),
            };
            DegradationSpec::Video(VideoCodecSpec {
                backend: c.backend,
                codec_name,
                bitrate,
                qp: qp_from_bitrate(bitrate),
            })
        }
    }
}

/// Included kinds (canonical order) for one clip, then the applied
/// permutation. Split out so order and inclusion can be reused per frame.
fn sample_structure(config: &PipelineConfig, clip_rng: &SeededRng) -> (Vec<DegradationKind>, Vec<usize>) {
    let mut include_rng = clip_rng.child(LBL_INCLUDE);
    let included: Vec<DegradationKind> = config
        .enabled_kinds()
        .into_iter()
        .filter(|kind| include_rng.bernoulli(config.inclusion_probability(*kind)))
        .collect();

    let mut permutation: Vec<usize> = (0..included.len()).collect();
    if config.shuffle {
        clip_rng.child(LBL_ORDER).shuffle(&mut permutation);
    }
    (included, permutation)
}

/// Sample one plan from the clip-level generator.
pub fn sample_plan(config: &PipelineConfig, clip_rng: &SeededRng) -> Result<PipelinePlan> {
    config.validate()?;
    let (included, permutation) = sample_structure(config, clip_rng);
    let specs: Vec<DegradationSpec> = included
        .iter()
        .map(|kind| {
            let mut param_rng = clip_rng.child(LBL_PARAM + kind.id());
            sample_spec_for(*kind, config, &mut param_rng)
        })
        .collect();
    let stages = permutation.iter().map(|i| specs[*i].clone()).collect();
    Ok(PipelinePlan {
        stages,
        order_permutation: permutation,
        provenance: PlanProvenance {
            seed: clip_rng.seed(),
            clip_stream: clip_rng.stream_id(),
        },
    })
}

/// Apply one frame-local stage with a dedicated realization stream.
fn apply_stage_frame(spec: &DegradationSpec, frame: &Frame, rng: &mut SeededRng) -> Result<Frame> {
    match spec {
        DegradationSpec::Blur(s) => convolve(frame, &make_kernel(s)?),
        DegradationSpec::Resize(s) => resizing_blur(frame, s),
        DegradationSpec::Gaussian(s) => add_gaussian(frame, s, rng),
        // Poisson and the sensor model need a physical (non-negative) signal.
        DegradationSpec::Poisson(s) => add_poisson(&frame.clamp_unit(), s, rng),
        DegradationSpec::Isp(s) => processed_camera_noise(&frame.clamp_unit(), s, rng),
        DegradationSpec::Speckle(s) => add_speckle(frame, s, rng),
        DegradationSpec::Jpeg(s) => jpeg_roundtrip(frame, s),
        DegradationSpec::Video(_) => unreachable!("video is clip-wide"),
    }
}

/// Realization stream label per stage: keyed by the stage's kind and, for
/// plans that repeat a kind, its occurrence number in pre-shuffle slot order.
/// Keying by kind rather than by applied position means a permutation of the
/// same stages sees identical noise draws, so order comparisons isolate the
/// effect of composition order alone.
fn stage_stream_labels(stages: &[DegradationSpec], permutation: &[usize]) -> Vec<u64> {
    let slot = |i: usize| permutation.get(i).copied().unwrap_or(i);
    stages
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let occurrence = stages
                .iter()
                .enumerate()
                .filter(|(j, other)| other.kind() == spec.kind() && slot(*j) < slot(i))
                .count() as u64;
            LBL_APPLY + spec.kind().id() + 8 * occurrence
        })
        .collect()
}

/// Apply a plan to a clip. Frame-local stages use per-frame realization
/// streams derived from `(clip stream, stage kind, frame index)`; video
/// compression is applied clip-wide.
pub fn apply_plan(
    clip: &Clip,
    plan: &PipelinePlan,
    clip_rng: &SeededRng,
    clamp_each_stage: bool,
) -> Result<Clip> {
    let labels = stage_stream_labels(&plan.stages, &plan.order_permutation);
    let mut current = clip.clone();
    for (index, spec) in plan.stages.iter().enumerate() {
        let kind = spec.kind();
        current = match spec {
            DegradationSpec::Video(s) => {
                video_compress(&current, s).map_err(|e| e.at_stage(index, kind.name()))?
            }
            _ => {
                let stage_rng = clip_rng.child(labels[index]);
                current
                    .frames()
                    .iter()
                    .enumerate()
                    .map(|(f, frame)| {
                        let mut frame_rng = stage_rng.child(f as u64);
                        apply_stage_frame(spec, frame, &mut frame_rng)
                            .map_err(|e| e.at_stage(index, kind.name()))
                    })
                    .collect::<Result<Vec<_>>>()
                    .and_then(|frames| Clip::with_rate_hint(frames, current.frame_rate_hint()))?
            }
        };
        if clamp_each_stage {
            current = current.clamp_unit();
        }
    }
    if !clamp_each_stage {
        current = current.clamp_unit();
    }
    Ok(current)
}

/// Stage parameters recorded for replay: one spec per stage, or one per
/// stage per frame when `param_scope` is per-frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum RecordedParams {
    PerClip { stages: Vec<DegradationSpec> },
    PerFrame { frames: Vec<Vec<DegradationSpec>> },
}

/// Manifest entry for one degraded clip.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_index: u64,
    pub name: String,
    pub clip_stream: u64,
    pub order: Vec<DegradationKind>,
    pub order_permutation: Vec<usize>,
    pub params: RecordedParams,
}

/// Machine-readable record of a dataset degradation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub config: PipelineConfig,
    pub clips: Vec<ClipRecord>,
    /// Clips that failed, as (name, error) pairs.
    pub failures: Vec<(String, String)>,
}

pub const MANIFEST_VERSION: u32 = 1;

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization")
    }

    pub fn from_json(text: &str) -> Result<Manifest> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("manifest parse: {e}")))
    }
}

/// Degrade one clip under a fresh plan; returns the output and its record.
pub fn degrade_clip(
    clip: &Clip,
    config: &PipelineConfig,
    clip_index: u64,
    name: &str,
) -> Result<(Clip, ClipRecord)> {
    config.validate()?;
    let clip_rng = root_rng(config.seed).child(clip_index);
    match config.param_scope {
        ParamScope::PerClip => {
            let plan = sample_plan(config, &clip_rng)?;
            let out = apply_plan(clip, &plan, &clip_rng, config.clamp_each_stage)?;
            let record = ClipRecord {
                clip_index,
                name: name.to_string(),
                clip_stream: clip_rng.stream_id(),
                order: plan.order(),
                order_permutation: plan.order_permutation.clone(),
                params: RecordedParams::PerClip {
                    stages: plan.stages,
                },
            };
            Ok((out, record))
        }
        ParamScope::PerFrame => {
            let (included, permutation) = sample_structure(config, &clip_rng);
            // Fresh parameters per frame, same kinds and order for the
            // whole clip. Video stays clip-wide with frame-0 parameters.
            let mut per_frame_specs: Vec<Vec<DegradationSpec>> = Vec::with_capacity(clip.len());
            for f in 0..clip.len() {
                let specs: Vec<DegradationSpec> = permutation
                    .iter()
                    .map(|i| {
                        let kind = included[*i];
                        let mut rng = clip_rng.child(LBL_PARAM + kind.id()).child(f as u64);
                        sample_spec_for(kind, config, &mut rng)
                    })
                    .collect();
                per_frame_specs.push(specs);
            }
            let out = apply_per_frame(
                clip,
                &per_frame_specs,
                &permutation,
                &clip_rng,
                config.clamp_each_stage,
            )?;
            let order = permutation.iter().map(|i| included[*i]).collect();
            let record = ClipRecord {
                clip_index,
                name: name.to_string(),
                clip_stream: clip_rng.stream_id(),
                order,
                order_permutation: permutation,
                params: RecordedParams::PerFrame {
                    frames: per_frame_specs,
                },
            };
            Ok((out, record))
        }
    }
}

/// Apply per-frame specs: stage s of frame f uses `per_frame_specs[f][s]`.
/// A video stage uses frame 0's parameters for the whole clip.
fn apply_per_frame(
    clip: &Clip,
    per_frame_specs: &[Vec<DegradationSpec>],
    permutation: &[usize],
    clip_rng: &SeededRng,
    clamp_each_stage: bool,
) -> Result<Clip> {
    let n_stages = per_frame_specs.first().map(|v| v.len()).unwrap_or(0);
    let labels = per_frame_specs
        .first()
        .map(|stages| stage_stream_labels(stages, permutation))
        .unwrap_or_default();
    let mut current = clip.clone();
    for index in 0..n_stages {
        let kind = per_frame_specs[0][index].kind();
        current = match &per_frame_specs[0][index] {
            DegradationSpec::Video(s) => {
                video_compress(&current, s).map_err(|e| e.at_stage(index, kind.name()))?
            }
            _ => {
                let stage_rng = clip_rng.child(labels[index]);
                current
                    .frames()
                    .iter()
                    .enumerate()
                    .map(|(f, frame)| {
                        let mut frame_rng = stage_rng.child(f as u64);
                        apply_stage_frame(&per_frame_specs[f][index], frame, &mut frame_rng)
                            .map_err(|e| e.at_stage(index, kind.name()))
                    })
                    .collect::<Result<Vec<_>>>()
                    .and_then(|frames| Clip::with_rate_hint(frames, current.frame_rate_hint()))?
            }
        };
        if clamp_each_stage {
            current = current.clamp_unit();
        }
    }
    if !clamp_each_stage {
        current = current.clamp_unit();
    }
    Ok(current)
}

/// Reproduce a degraded clip exactly from its manifest record.
pub fn replay_clip(clean: &Clip, config: &PipelineConfig, record: &ClipRecord) -> Result<Clip> {
    let clip_rng = SeededRng::new(config.seed, record.clip_stream);
    match &record.params {
        RecordedParams::PerClip { stages } => {
            let plan = PipelinePlan {
                stages: stages.clone(),
                order_permutation: record.order_permutation.clone(),
                provenance: PlanProvenance {
                    seed: config.seed,
                    clip_stream: record.clip_stream,
                },
            };
            apply_plan(clean, &plan, &clip_rng, config.clamp_each_stage)
        }
        RecordedParams::PerFrame { frames } => apply_per_frame(
            clean,
            frames,
            &record.order_permutation,
            &clip_rng,
            config.clamp_each_stage,
        ),
    }
}

/// Degrade a set of clips. Output slots align with the input; failed clips
/// yield `None` and are listed in the manifest's failures.
pub fn degrade_dataset(clips: &[Clip], config: &PipelineConfig) -> Result<(Vec<Option<Clip>>, Manifest)> {
    if clips.is_empty() {
        return Err(Error::Argument("degrade_dataset on empty input".into()));
    }
    config.validate()?;
    let mut outputs = Vec::with_capacity(clips.len());
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, clip) in clips.iter().enumerate() {
        let name = format!("clip_{i:04}");
        match degrade_clip(clip, config, i as u64, &name) {
            Ok((out, record)) => {
                outputs.push(Some(out));
                records.push(record);
            }
            Err(e) => {
                outputs.push(None);
                failures.push((name, e.to_string()));
            }
        }
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        config: config.clone(),
        clips: records,
        failures,
    };
    Ok((outputs, manifest))
}
