//! Processed camera sensor noise: reverse ISP to a Bayer raw mosaic, inject
//! Poisson-Gaussian sensor noise, and run the forward ISP back to sRGB.
//!
//! Forward order: bilinear demosaic -> white-balance gains -> color
//! correction matrix -> sRGB encode -> clamp. Reverse inverts each step and
//! ends by mosaicking to the configured Bayer pattern. Raw values are clamped to
//! [0, 1] (sensor range).

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::plane::Plane;
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

/// 2x2 Bayer color filter layouts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BayerPattern {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

impl BayerPattern {
    pub const ALL: [BayerPattern; 4] = [
        BayerPattern::Rggb,
        BayerPattern::Bggr,
        BayerPattern::Grbg,
        BayerPattern::Gbrg,
    ];

    /// Channel index (0=R, 1=G, 2=B) at pixel (y, x).
    #[inline]
    pub fn channel_at(self, y: usize, x: usize) -> usize {
        let (ey, ex) = (y % 2, x % 2);
        let quad = match self {
            BayerPattern::Rggb => [[0, 1], [1, 2]],
            BayerPattern::Bggr => [[2, 1], [1, 0]],
            BayerPattern::Grbg => [[1, 0], [2, 1]],
            BayerPattern::Gbrg => [[1, 2], [0, 1]],
        };
        quad[ey][ex]
    }
}

/// Camera sensor noise parameters and ISP configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IspNoiseSpec {
    pub bayer_pattern: BayerPattern,
    /// Photon-to-signal gain; shot-noise variance at raw level r is r * gain.
    pub shot_gain: f64,
    /// Read-noise standard deviation in raw units.
    pub read_sigma: f64,
    /// White-balance gains for (red, blue); green is fixed at 1.
    pub wb_gains: (f64, f64),
    /// Row-major color correction matrix, rows summing to 1.
    pub ccm: [[f64; 3]; 3],
}

/// Default CCM: near-identity with mild cross-talk, rows summing to 1.
pub const DEFAULT_CCM: [[f64; 3]; 3] = [
    [1.08, -0.05, -0.03],
    [-0.04, 1.10, -0.06],
    [-0.02, -0.07, 1.09],
];

impl IspNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.shot_gain < 0.0 || self.read_sigma < 0.0 {
            return Err(Error::Argument("isp noise strengths must be non-negative".into()));
        }
        if self.wb_gains.0 <= 0.0 || self.wb_gains.1 <= 0.0 {
            return Err(Error::Argument("white-balance gains must be positive".into()));
        }
        for row in &self.ccm {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Argument(format!(
                    "ccm row sums to {sum}, expected 1 (white preservation)"
                )));
            }
        }
        Ok(())
    }
}

/// Single-channel Bayer raster in the linear domain.
#[derive(Clone, Debug)]
pub struct RawMosaic {
    pub pattern: BayerPattern,
    pub plane: Plane,
}

/// sRGB electro-optical transfer: encoded [0,1] -> linear [0,1].
#[inline]
pub fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Linear [0,1] -> sRGB encoded [0,1].
#[inline]
pub fn linear_to_srgb(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn invert_3x3(m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-8 {
        return Err(Error::Argument("ccm is singular".into()));
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    #[allow(clippy::needless_range_loop)]
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let (c, d) = ((j + 1) % 3, (j + 2) % 3);
            // Cofactor transpose.
            inv[j][i] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) * inv_det;
        }
    }
    Ok(inv)
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// sRGB frame -> linear Bayer mosaic (inverse tone curve, inverse CCM,
/// inverse white balance, mosaic).
pub fn isp_reverse(frame: &Frame, spec: &IspNoiseSpec) -> Result<RawMosaic> {
    spec.validate()?;
    let ccm_inv = invert_3x3(&spec.ccm)?;
    let (h, w) = (frame.height(), frame.width());
    let mut data = vec![0.0f32; h * w];
    for y in 0..h {
        for x in 0..w {
            let rgb = [
                srgb_to_linear(frame.get(y, x, 0) as f64),
                srgb_to_linear(frame.get(y, x, 1) as f64),
                srgb_to_linear(frame.get(y, x, 2) as f64),
            ];
            let cam = mat_vec(&ccm_inv, rgb);
            let unbalanced = [cam[0] / spec.wb_gains.0, cam[1], cam[2] / spec.wb_gains.1];
            let c = spec.bayer_pattern.channel_at(y, x);
            data[y * w + x] = unbalanced[c].clamp(0.0, 1.0) as f32;
        }
    }
    Ok(RawMosaic {
        pattern: spec.bayer_pattern,
        plane: Plane::new(h, w, data),
    })
}

/// Heteroscedastic Poisson-Gaussian sensor noise on the raw mosaic:
/// `Poisson(raw / gain) * gain + N(0, read_sigma^2)`.
pub fn isp_add_raw_noise(raw: &RawMosaic, spec: &IspNoiseSpec, rng: &mut SeededRng) -> Result<RawMosaic> {
    spec.validate()?;
    if raw.plane.data.iter().any(|v| *v < 0.0) {
        return Err(Error::Argument("raw mosaic has negative samples".into()));
    }
    let mut out = raw.clone();
    for v in &mut out.plane.data {
        let mut value = *v as f64;
        if spec.shot_gain > 0.0 {
            value = rng.poisson(value / spec.shot_gain) as f64 * spec.shot_gain;
        }
        if spec.read_sigma > 0.0 {
            value += rng.normal() * spec.read_sigma;
        }
        *v = value as f32;
    }
    Ok(out)
}

/// Linear Bayer mosaic -> sRGB frame (bilinear demosaic, white balance, CCM,
/// tone curve, clamp).
pub fn isp_forward(raw: &RawMosaic, spec: &IspNoiseSpec) -> Result<Frame> {
    spec.validate()?;
    let (h, w) = (raw.plane.height, raw.plane.width);
    let demosaiced = demosaic_bilinear(raw);
    let mut data = vec![0.0f32; h * w * 3];
    for y in 0..h {
        for x in 0..w {
            let cam = [
                demosaiced[0].get(y, x) as f64 * spec.wb_gains.0,
                demosaiced[1].get(y, x) as f64,
                demosaiced[2].get(y, x) as f64 * spec.wb_gains.1,
            ];
            let rgb = mat_vec(&spec.ccm, cam);
            for c in 0..3 {
                data[(y * w + x) * 3 + c] = linear_to_srgb(rgb[c].max(0.0)).clamp(0.0, 1.0) as f32;
            }
        }
    }
    Frame::new(h, w, data)
}

/// Sensor-noise degradation g(x) = forward(add_noise(reverse(x))).
pub fn processed_camera_noise(frame: &Frame, spec: &IspNoiseSpec, rng: &mut SeededRng) -> Result<Frame> {
    let raw = isp_reverse(frame, spec)?;
    // Sensor raw is non-negative; read noise may have pushed samples below 0.
    let mut noisy = isp_add_raw_noise(&raw, spec, rng)?;
    for v in &mut noisy.plane.data {
        *v = v.clamp(0.0, 1.0);
    }
    isp_forward(&noisy, spec)
}

/// Bilinear demosaic: missing colors average the nearest mosaic sites of that
/// color (reflect-101 borders).
fn demosaic_bilinear(raw: &RawMosaic) -> [Plane; 3] {
    let (h, w) = (raw.plane.height, raw.plane.width);
    let mut out = [
        Plane::filled(h, w, 0.0),
        Plane::filled(h, w, 0.0),
        Plane::filled(h, w, 0.0),
    ];
    let site = |y: isize, x: isize| -> (usize, f32) {
        let yy = crate::plane::reflect_index(y, h);
        let xx = crate::plane::reflect_index(x, w);
        (raw.pattern.channel_at(yy, xx), raw.plane.get(yy, xx))
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let own = raw.pattern.channel_at(y as usize, x as usize);
            let mut sums = [0.0f64; 3];
            let mut counts = [0.0f64; 3];
            // The 3x3 neighborhood contains the nearest sites of every color
            // for any 2x2 Bayer layout.
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if dy == 0 && dx == 0 {
                        continue;
                    }
                    let (c, v) = site(y + dy, x + dx);
                    if c == own {
                        continue;
                    }
                    sums[c] += v as f64;
                    counts[c] += 1.0;
                }
            }
            for c in 0..3 {
                let v = if c == own {
                    raw.plane.get(y as usize, x as usize)
                } else {
                    (sums[c] / counts[c]) as f32
                };
                out[c].set(y as usize, x as usize, v);
            }
        }
    }
    out
}
