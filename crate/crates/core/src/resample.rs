//! Resizing operations and the resizing-blur degradation (scale down or up,
//! then return to the original size with the same interpolation mode).

use crate::error::{Error, Result};
use crate::frame::{Clip, Frame};
use crate::plane;
use serde::{Deserialize, Serialize};

/// Interpolation mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMode {
    Bilinear,
    Area,
    Bicubic,
}

impl ResizeMode {
    pub const ALL: [ResizeMode; 3] = [ResizeMode::Bilinear, ResizeMode::Area, ResizeMode::Bicubic];
}

/// Resizing-blur parameters. The sampled scale multiplies the dimensions for
/// the first resize; the second resize returns to the original size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResizeSpec {
    pub scale: f64,
    pub mode: ResizeMode,
}

/// Keys cubic parameter; -0.5 is the Catmull-Rom convention used by default.
pub const BICUBIC_A: f64 = -0.5;

/// Resize one frame. Bicubic output is clamped to [0,1] (kernel overshoot);
/// bilinear and area are convex and preserve the input range.
pub fn resize(frame: &Frame, target_h: usize, target_w: usize, mode: ResizeMode) -> Result<Frame> {
    resize_with_cubic(frame, target_h, target_w, mode, BICUBIC_A)
}

/// As [`resize`] with an explicit Keys parameter for bicubic.
pub fn resize_with_cubic(
    frame: &Frame,
    target_h: usize,
    target_w: usize,
    mode: ResizeMode,
    cubic_a: f64,
) -> Result<Frame> {
    if target_h == 0 || target_w == 0 {
        return Err(Error::Argument("resize target must be at least 1x1".into()));
    }
    let planes = [
        frame.channel_plane(0),
        frame.channel_plane(1),
        frame.channel_plane(2),
    ];
    let resized = planes.map(|p| match mode {
        ResizeMode::Bilinear => plane::resize_bilinear(&p, target_h, target_w),
        ResizeMode::Area => plane::resize_area(&p, target_h, target_w),
        ResizeMode::Bicubic => {
            let mut out = plane::resize_bicubic(&p, target_h, target_w, cubic_a);
            for v in &mut out.data {
                *v = v.clamp(0.0, 1.0);
            }
            out
        }
    });
    Ok(Frame::from_planes(&resized))
}

/// Resize every frame of a clip.
pub fn resize_clip(clip: &Clip, target_h: usize, target_w: usize, mode: ResizeMode) -> Result<Clip> {
    clip.map_frames(|f| resize(f, target_h, target_w, mode))
}

/// Scale by `spec.scale` (rounded dimensions) and back to the original size
/// with the same mode.
pub fn resizing_blur(frame: &Frame, spec: &ResizeSpec) -> Result<Frame> {
    if !(spec.scale.is_finite() && spec.scale > 0.0) {
        return Err(Error::Argument("resize scale must be positive".into()));
    }
    let ih = (frame.height() as f64 * spec.scale).round() as usize;
    let iw = (frame.width() as f64 * spec.scale).round() as usize;
    if ih == 0 || iw == 0 {
        return Err(Error::Argument(format!(
            "intermediate size {ih}x{iw} below 1 pixel at scale {}",
            spec.scale
        )));
    }
    let intermediate = resize(frame, ih, iw, spec.mode)?;
    resize(&intermediate, frame.height(), frame.width(), spec.mode)
}
