//! Deterministic synthetic test content.
//!
//! Procedurally generated frames with natural-image statistics: smooth
//! large-scale gradients, a few soft structures, and band-limited texture.
//! Used by the test suites and handy for trying the CLI without real footage.

use crate::frame::{Clip, Frame};
use crate::kernels::{convolve, make_kernel, KernelFamily, KernelSpec};
use crate::rng::SeededRng;

/// Smooth, structured frame; `variant` selects different content.
pub fn natural_frame(height: usize, width: usize, variant: u64) -> Frame {
    let mut rng = SeededRng::new(0x5eed_f127 ^ variant, variant);
    // Band-limited texture: white noise blurred by a wide Gaussian.
    let noise = Frame::from_fn(height, width, |_, _| {
        [
            rng.uniform() as f32,
            rng.uniform() as f32,
            rng.uniform() as f32,
        ]
    });
    let blur = make_kernel(&KernelSpec {
        family: KernelFamily::Iso,
        size: 9,
        sigma_x: 2.0,
        sigma_y: 2.0,
        rotation_theta: 0.0,
        shape_beta: None,
        cutoff_omega: None,
    })
    .expect("fixture blur kernel");
    let texture = convolve(&noise, &blur).expect("fixture texture");

    let fv = variant as f32;
    let (h, w) = (height as f32, width as f32);
    Frame::from_fn(height, width, |y, x| {
        let (fy, fx) = (y as f32 / h, x as f32 / w);
        // Large-scale gradients plus two soft radial bumps.
        let d1 = ((fx - 0.3).powi(2) + (fy - 0.35).powi(2)).sqrt();
        let d2 = ((fx - 0.7).powi(2) + (fy - 0.65).powi(2)).sqrt();
        let bump = 0.22 * (-d1 * d1 * 40.0).exp() - 0.18 * (-d2 * d2 * 55.0).exp();
        let swirl = 0.06 * (6.0 * fx + 4.0 * fy + 0.7 * fv).sin();
        let base_r = 0.45 + 0.25 * fx + bump + swirl;
        let base_g = 0.5 + 0.2 * fy - 0.5 * bump + swirl;
        let base_b = 0.4 + 0.15 * (fx + fy) + 0.3 * bump - swirl;
        let t = |c: usize| 0.18 * (texture.get(y, x, c) - 0.5);
        [
            (base_r + t(0)).clamp(0.02, 0.98),
            (base_g + t(1)).clamp(0.02, 0.98),
            (base_b + t(2)).clamp(0.02, 0.98),
        ]
    })
}

/// Clip of gently panning natural frames.
pub fn natural_clip(n_frames: usize, height: usize, width: usize, variant: u64) -> Clip {
    let big = natural_frame(height + n_frames, width + n_frames, variant);
    let frames = (0..n_frames)
        .map(|t| {
            Frame::from_fn(height, width, |y, x| {
                [
                    big.get(y + t, x + t, 0),
                    big.get(y + t, x + t, 1),
                    big.get(y + t, x + t, 2),
                ]
            })
        })
        .collect();
    Clip::new(frames).expect("fixture clip")
}
