//! Reference quality metrics: MSE/PSNR on unit-range rasters, plus the
//! 8-pixel-period blockiness measure used to detect block-DCT artifacts.

use crate::error::{Error, Result};
use crate::frame::{Clip, Frame};

/// Mean squared error over all channels.
pub fn mse_frame(a: &Frame, b: &Frame) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::Shape(format!(
            "mse: {}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let n = a.data().len() as f64;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum();
    Ok(sum / n)
}

/// PSNR in dB for unit-range frames, averaged over RGB channels.
/// Returns `f64::INFINITY` when the inputs are identical.
pub fn psnr_frame(a: &Frame, b: &Frame) -> Result<f64> {
    Ok(psnr_from_mse(mse_frame(a, b)?))
}

/// PSNR over every frame and channel of two aligned clips.
pub fn psnr_clip(a: &Clip, b: &Clip) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::Shape("psnr: clips differ in shape or length".into()));
    }
    let mut sum = 0.0;
    let mut n = 0.0;
    for (fa, fb) in a.frames().iter().zip(b.frames().iter()) {
        sum += mse_frame(fa, fb)? * fa.data().len() as f64;
        n += fa.data().len() as f64;
    }
    Ok(psnr_from_mse(sum / n))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// Blockiness: mean absolute horizontal+vertical luma gradient at 8-aligned
/// block boundaries minus the same measure elsewhere. Positive values mean
/// discontinuities concentrate on the 8x8 grid.
pub fn blockiness(frame: &Frame) -> f64 {
    let (h, w) = (frame.height(), frame.width());
    let luma = |y: usize, x: usize| -> f64 {
        0.299 * frame.get(y, x, 0) as f64
            + 0.587 * frame.get(y, x, 1) as f64
            + 0.114 * frame.get(y, x, 2) as f64
    };
    let mut boundary = (0.0f64, 0u64);
    let mut interior = (0.0f64, 0u64);
    for y in 0..h {
        for x in 1..w {
            let g = (luma(y, x) - luma(y, x - 1)).abs();
            if x % 8 == 0 {
                boundary.0 += g;
                boundary.1 += 1;
            } else {
                interior.0 += g;
                interior.1 += 1;
            }
        }
    }
    for y in 1..h {
        for x in 0..w {
            let g = (luma(y, x) - luma(y - 1, x)).abs();
            if y % 8 == 0 {
                boundary.0 += g;
                boundary.1 += 1;
            } else {
                interior.0 += g;
                interior.1 += 1;
            }
        }
    }
    if boundary.1 == 0 || interior.1 == 0 {
        return 0.0;
    }
    boundary.0 / boundary.1 as f64 - interior.0 / interior.1 as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_identity_is_infinite() {
        let f = Frame::from_fn(8, 8, |y, x| [y as f32 / 8.0, x as f32 / 8.0, 0.5]);
        assert!(psnr_frame(&f, &f).unwrap().is_infinite());
    }

    #[test]
    fn psnr_constant_offset_is_20db() {
        // MSE = 0.01 -> 10*log10(1/0.01) = 20 dB (f32 representation of 0.4
        // is ~6e-9 off, hence the tolerance).
        let a = Frame::constant(16, 16, 0.4);
        let b = Frame::constant(16, 16, 0.5);
        let p = psnr_frame(&a, &b).unwrap();
        assert!((p - 20.0).abs() < 1e-5, "psnr {p}");
    }

    #[test]
    fn psnr_awgn_sigma_50_unclamped() {
        // 10*log10(255^2/50^2) = 14.1497 dB; same number on the unit scale.
        let expected = 10.0 * (255.0f64 * 255.0 / (50.0 * 50.0)).log10();
        let sigma = 50.0 / 255.0;
        let mut rng = crate::rng::SeededRng::new(9, 0);
        let clean = Frame::constant(400, 400, 0.5);
        let mut noisy = clean.clone();
        for v in noisy.data_mut() {
            *v += (rng.normal() * sigma) as f32;
        }
        let p = psnr_frame(&noisy, &clean).unwrap();
        assert!((p - expected).abs() < 0.05, "psnr {p} vs {expected}");
    }

    #[test]
    fn psnr_symmetric_and_monotone_in_mse() {
        let a = Frame::constant(4, 4, 0.2);
        let b = Frame::constant(4, 4, 0.25);
        let c = Frame::constant(4, 4, 0.4);
        assert_eq!(psnr_frame(&a, &b).unwrap(), psnr_frame(&b, &a).unwrap());
        assert!(psnr_frame(&a, &b).unwrap() > psnr_frame(&a, &c).unwrap());
    }

    #[test]
    fn blockiness_detects_grid() {
        // Frame with jumps only at 8-aligned columns/rows.
        let f = Frame::from_fn(32, 32, |y, x| {
            let v = if (x / 8 + y / 8) % 2 == 0 { 0.3 } else { 0.7 };
            [v, v, v]
        });
        assert!(blockiness(&f) > 0.01);
        let smooth = Frame::from_fn(32, 32, |y, x| {
            let v = (x as f32 + y as f32) / 64.0;
            [v, v, v]
        });
        assert!(blockiness(&smooth).abs() < 1e-6);
    }
}
