//! Video compression degradation.
//!
//! The builtin backend is a deterministic intra+inter transform codec: frame 0
//! is intra-coded with an 8x8 DCT and a uniform quantizer; every later frame
//! codes its residual against the previous reconstructed frame with the same
//! quantizer. No motion estimation. The quantizer step follows the H.264-style
//! exponential ladder `step = 2^((qp - 8) / 6)`, so qp 8 is step 1
//! (near-lossless) and qp 51 is step ~144.
//!
//! The external backend pipes raw 4:2:0 frames through an encoder executable
//! (ffmpeg-compatible arguments) named by the `VIDNOISE_ENCODER` environment
//! variable. It is opt-in: bitstreams from external builds are not guaranteed
//! reproducible.

use super::dct;
use super::yuv;
use crate::error::{Error, Result};
use crate::frame::Clip;
use crate::plane::Plane;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::process::{Command, Stdio};

/// Environment variable naming the external encoder executable.
pub const ENCODER_ENV_VAR: &str = "VIDNOISE_ENCODER";

/// Codec backend selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecBackend {
    Builtin,
    External,
}

/// External codec names accepted by the sampler.
pub const EXTERNAL_CODECS: [&str; 3] = ["libx264", "h264", "mpeg4"];

/// Video compression parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VideoCodecSpec {
    pub backend: CodecBackend,
    /// Encoder name for the external backend.
    pub codec_name: String,
    /// Target bitrate in bits/s; drives `qp` for the builtin backend.
    pub bitrate: f64,
    /// Builtin quantization parameter in [8, 51].
    pub qp: u8,
}

impl VideoCodecSpec {
    /// Builtin spec with qp derived from the bitrate.
    pub fn builtin(bitrate: f64) -> VideoCodecSpec {
        VideoCodecSpec {
            backend: CodecBackend::Builtin,
            codec_name: String::new(),
            bitrate,
            qp: qp_from_bitrate(bitrate),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(8..=51).contains(&self.qp) {
            return Err(Error::Argument(format!("qp {} outside [8, 51]", self.qp)));
        }
        if self.backend == CodecBackend::External
            && !EXTERNAL_CODECS.contains(&self.codec_name.as_str())
        {
            return Err(Error::Argument(format!(
                "external codec {:?} not in {:?}",
                self.codec_name, EXTERNAL_CODECS
            )));
        }
        Ok(())
    }
}

/// Monotone bitrate -> qp map, calibrated at 256x256 x 24 fps:
/// qp = clamp(round(51 - 8*log2(bitrate / 1e4)), 8, 51).
pub fn qp_from_bitrate(bitrate: f64) -> u8 {
    let qp = (51.0 - 8.0 * (bitrate / 1.0e4).log2()).round();
    qp.clamp(8.0, 51.0) as u8
}

/// Uniform quantizer step for a qp.
pub fn quant_step(qp: u8) -> f64 {
    2f64.powf((qp as f64 - 8.0) / 6.0)
}

/// Compress a clip. Deterministic for the builtin backend; the external
/// backend shells out to the configured encoder.
pub fn video_compress(clip: &Clip, spec: &VideoCodecSpec) -> Result<Clip> {
    spec.validate()?;
    match spec.backend {
        CodecBackend::Builtin => builtin_compress(clip, spec.qp),
        CodecBackend::External => external_compress(clip, spec),
    }
}

fn quantize_block_plane(plane: &Plane, step: f64, center: f64) -> Plane {
    let (h, w) = (plane.height, plane.width);
    let bh = h.div_ceil(8) * 8;
    let bw = w.div_ceil(8) * 8;
    let mut padded = vec![0.0f64; bh * bw];
    for y in 0..bh {
        for x in 0..bw {
            padded[y * bw + x] = plane.get(y.min(h - 1), x.min(w - 1)) as f64 - center;
        }
    }
    for by in (0..bh).step_by(8) {
        for bx in (0..bw).step_by(8) {
            let mut block = [0.0f64; 64];
            for y in 0..8 {
                for x in 0..8 {
                    block[y * 8 + x] = padded[(by + y) * bw + bx + x];
                }
            }
            let mut coefs = dct::forward(&block);
            for cf in &mut coefs {
                *cf = (*cf / step).round() * step;
            }
            let rec = dct::inverse(&coefs);
            for y in 0..8 {
                for x in 0..8 {
                    padded[(by + y) * bw + bx + x] = rec[y * 8 + x];
                }
            }
        }
    }
    let mut out = vec![0.0f32; h * w];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (padded[y * bw + x] + center) as f32;
        }
    }
    Plane::new(h, w, out)
}

fn builtin_compress(clip: &Clip, qp: u8) -> Result<Clip> {
    let step = quant_step(qp);
    let mut recon_planes: Option<[Plane; 3]> = None;
    let mut out_frames = Vec::with_capacity(clip.len());

    for frame in clip.frames() {
        let current = yuv::rgb_to_ycbcr(frame);
        let recon = match &recon_planes {
            None => {
                // Intra: quantize the centered planes directly.
                [
                    quantize_block_plane(&current[0], step, 128.0),
                    quantize_block_plane(&current[1], step, 128.0),
                    quantize_block_plane(&current[2], step, 128.0),
                ]
            }
            Some(prev) => {
                // Inter: quantize the residual against the previous
                // reconstruction, then add it back.
                let mut rec = Vec::with_capacity(3);
                for c in 0..3 {
                    let residual = Plane::new(
                        current[c].height,
                        current[c].width,
                        current[c]
                            .data
                            .iter()
                            .zip(prev[c].data.iter())
                            .map(|(a, b)| a - b)
                            .collect(),
                    );
                    let coded = quantize_block_plane(&residual, step, 0.0);
                    rec.push(Plane::new(
                        residual.height,
                        residual.width,
                        coded
                            .data
                            .iter()
                            .zip(prev[c].data.iter())
                            .map(|(r, p)| (r + p).clamp(0.0, 255.0))
                            .collect(),
                    ));
                }
                [rec.remove(0), rec.remove(0), rec.remove(0)]
            }
        };
        out_frames.push(yuv::ycbcr_to_rgb(&recon));
        recon_planes = Some(recon);
    }
    Clip::with_rate_hint(out_frames, clip.frame_rate_hint())
}

/// Shell out to the external encoder: encode raw 4:2:0 frames into a
/// temporary container at the requested codec/bitrate, decode back, and check
/// the dimensions/length contract. Both command lines are recorded in the
/// returned clip's provenance by the pipeline layer via [`external_commands`].
fn external_compress(clip: &Clip, spec: &VideoCodecSpec) -> Result<Clip> {
    let exe = std::env::var(ENCODER_ENV_VAR).map_err(|_| {
        Error::Environment(format!(
            "external video backend requires {ENCODER_ENV_VAR} to name the encoder executable"
        ))
    })?;
    let (h, w) = (clip.height(), clip.width());
    let dir = std::env::temp_dir();
    let unique = format!(
        "vidnoise-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    );
    let container = dir.join(format!("{unique}.bin"));

    let (enc_args, dec_args) = external_commands(spec, h, w, &container.to_string_lossy());

    // Encode: raw frames on stdin.
    let mut enc = Command::new(&exe)
        .args(&enc_args)
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Environment(format!("spawning {exe}: {e}")))?;
    {
        let stdin = enc.stdin.as_mut().expect("piped stdin");
        for frame in clip.frames() {
            stdin.write_all(&yuv::frame_to_yuv420(frame))?;
        }
    }
    let status = enc.wait()?;
    if !status.success() {
        let _ = std::fs::remove_file(&container);
        return Err(Error::Environment(format!("external encoder failed: {status}")));
    }

    // Decode: raw frames on stdout.
    let out = Command::new(&exe)
        .args(&dec_args)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .output()
        .map_err(|e| Error::Environment(format!("spawning {exe}: {e}")))?;
    let _ = std::fs::remove_file(&container);
    if !out.status.success() {
        return Err(Error::Environment(format!(
            "external decoder failed: {}",
            out.status
        )));
    }

    let frame_bytes = h * w + 2 * (h.div_ceil(2) * w.div_ceil(2));
    if out.stdout.len() != frame_bytes * clip.len() {
        return Err(Error::Integrity(format!(
            "external tool returned {} bytes, expected {} ({} frames of {})",
            out.stdout.len(),
            frame_bytes * clip.len(),
            clip.len(),
            frame_bytes
        )));
    }
    let mut frames = Vec::with_capacity(clip.len());
    for chunk in out.stdout.chunks_exact(frame_bytes) {
        frames.push(
            yuv::yuv420_to_frame(chunk, h, w)
                .ok_or_else(|| Error::Integrity("external frame size mismatch".into()))?,
        );
    }
    Clip::with_rate_hint(frames, clip.frame_rate_hint())
}

/// The exact argument lists used for the external encode and decode calls
/// (ffmpeg-compatible). Exposed so manifests can record the full command line.
pub fn external_commands(
    spec: &VideoCodecSpec,
    h: usize,
    w: usize,
    container: &str,
) -> (Vec<String>, Vec<String>) {
    let enc = vec![
        "-f".into(),
        "rawvideo".into(),
        "-pix_fmt".into(),
        "yuv420p".into(),
        "-s".into(),
        format!("{w}x{h}"),
        "-r".into(),
        "24".into(),
        "-i".into(),
        "-".into(),
        "-c:v".into(),
        spec.codec_name.clone(),
        "-b:v".into(),
        format!("{}", spec.bitrate as u64),
        "-y".into(),
        container.to_string(),
    ];
    let dec = vec![
        "-i".into(),
        container.to_string(),
        "-f".into(),
        "rawvideo".into(),
        "-pix_fmt".into(),
        "yuv420p".into(),
        "-".into(),
    ];
    (enc, dec)
}
