//! Frame and clip types.
//!
//! A [`Frame`] is a row-major RGB raster of `f32` samples with nominal range
//! `[0, 1]`. Samples may leave that range between degradation stages (noise is
//! added unclamped); [`Frame::clamp_unit`] restores it. Samples are always
//! finite at module boundaries.

use crate::error::{Error, Result};

/// Single RGB image, row-major, 3 interleaved channels, nominal range [0,1].
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Frame {
    /// Build a frame from raw interleaved RGB data.
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Argument("frame dimensions must be positive".into()));
        }
        if data.len() != height * width * 3 {
            return Err(Error::Shape(format!(
                "frame data length {} != {}x{}x3",
                data.len(),
                height,
                width
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("frame contains non-finite samples".into()));
        }
        Ok(Frame {
            height,
            width,
            data,
        })
    }

    /// Constant-valued frame (same value in all channels).
    pub fn constant(height: usize, width: usize, value: f32) -> Self {
        Frame::new(height, width, vec![value; height * width * 3])
            .expect("constant frame construction")
    }

    /// Build from a per-pixel closure returning `[r, g, b]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(y, x));
            }
        }
        Frame::new(height, width, data).expect("from_fn frame construction")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * 3 + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * 3 + c] = v;
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Elementwise clamp to [0, 1]. Idempotent.
    pub fn clamp_unit(&self) -> Frame {
        let data = self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Frame {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// One channel as a contiguous plane.
    pub(crate) fn channel_plane(&self, c: usize) -> crate::plane::Plane {
        let mut out = Vec::with_capacity(self.height * self.width);
        for px in 0..self.height * self.width {
            out.push(self.data[px * 3 + c]);
        }
        crate::plane::Plane::new(self.height, self.width, out)
    }

    /// Reassemble from three channel planes of equal shape.
    pub(crate) fn from_planes(planes: &[crate::plane::Plane; 3]) -> Frame {
        let (h, w) = (planes[0].height, planes[0].width);
        debug_assert!(planes.iter().all(|p| p.height == h && p.width == w));
        let mut data = vec![0.0f32; h * w * 3];
        for c in 0..3 {
            for px in 0..h * w {
                data[px * 3 + c] = planes[c].data[px];
            }
        }
        Frame {
            height: h,
            width: w,
            data,
        }
    }
}

/// Signed difference `degraded - clean`, elementwise and unclamped.
///
/// Returns a raster with the same layout as the inputs; samples lie in
/// [-1, 1] when both inputs are in unit range.
pub fn residual(degraded: &Frame, clean: &Frame) -> Result<Vec<f32>> {
    if !degraded.same_shape(clean) {
        return Err(Error::Shape(format!(
            "residual: {}x{} vs {}x{}",
            degraded.height, degraded.width, clean.height, clean.width
        )));
    }
    Ok(degraded
        .data
        .iter()
        .zip(clean.data.iter())
        .map(|(d, c)| d - c)
        .collect())
}

/// Ordered frame sequence with uniform dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
    frame_rate_hint: Option<f64>,
}

impl Clip {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        Clip::with_rate_hint(frames, None)
    }

    pub fn with_rate_hint(frames: Vec<Frame>, frame_rate_hint: Option<f64>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Argument("clip needs at least one frame".into()));
        }
        let (h, w) = (frames[0].height(), frames[0].width());
        if frames.iter().any(|f| f.height() != h || f.width() != w) {
            return Err(Error::Shape("clip frames differ in dimensions".into()));
        }
        if let Some(r) = frame_rate_hint {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Argument("frame rate hint must be positive".into()));
            }
        }
        Ok(Clip {
            frames,
            frame_rate_hint,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn frame_rate_hint(&self) -> Option<f64> {
        self.frame_rate_hint
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn same_shape(&self, other: &Clip) -> bool {
        self.len() == other.len() && self.height() == other.height() && self.width() == other.width()
    }

    pub fn clamp_unit(&self) -> Clip {
        Clip {
            frames: self.frames.iter().map(Frame::clamp_unit).collect(),
            frame_rate_hint: self.frame_rate_hint,
        }
    }

    /// Map every frame through `f`, keeping the rate hint.
    pub fn map_frames(&self, mut f: impl FnMut(&Frame) -> Result<Frame>) -> Result<Clip> {
        let frames = self
            .frames
            .iter()
            .map(&mut f)
            .collect::<Result<Vec<_>>>()?;
        Clip::with_rate_hint(frames, self.frame_rate_hint)
    }
}
