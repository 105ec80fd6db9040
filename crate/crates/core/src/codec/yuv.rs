//! BT.601 full-range RGB <-> YCbCr conversion and 4:2:0 chroma handling,
//! shared by the JPEG path, the builtin video codec, and raw-frame I/O.

use crate::frame::Frame;
use crate::plane::{downsample_2x2, resize_bilinear, Plane};

/// RGB frame -> full-range YCbCr planes on the 0-255 scale.
pub fn rgb_to_ycbcr(frame: &Frame) -> [Plane; 3] {
    let (h, w) = (frame.height(), frame.width());
    let mut y = vec![0.0f32; h * w];
    let mut cb = vec![0.0f32; h * w];
    let mut cr = vec![0.0f32; h * w];
    for (i, px) in frame.data().chunks_exact(3).enumerate() {
        let r = px[0] as f64 * 255.0;
        let g = px[1] as f64 * 255.0;
        let b = px[2] as f64 * 255.0;
        y[i] = (0.299 * r + 0.587 * g + 0.114 * b) as f32;
        cb[i] = (128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b) as f32;
        cr[i] = (128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b) as f32;
    }
    [
        Plane::new(h, w, y),
        Plane::new(h, w, cb),
        Plane::new(h, w, cr),
    ]
}

/// Full-range YCbCr planes (0-255 scale, equal dimensions) -> RGB frame in
/// [0,1], clamped.
pub fn ycbcr_to_rgb(planes: &[Plane; 3]) -> Frame {
    let (h, w) = (planes[0].height, planes[0].width);
    let mut data = vec![0.0f32; h * w * 3];
    for i in 0..h * w {
        let y = planes[0].data[i] as f64;
        let cb = planes[1].data[i] as f64 - 128.0;
        let cr = planes[2].data[i] as f64 - 128.0;
        let r = y + 1.402 * cr;
        let g = y - 0.344_136 * cb - 0.714_136 * cr;
        let b = y + 1.772 * cb;
        data[i * 3] = (r / 255.0).clamp(0.0, 1.0) as f32;
        data[i * 3 + 1] = (g / 255.0).clamp(0.0, 1.0) as f32;
        data[i * 3 + 2] = (b / 255.0).clamp(0.0, 1.0) as f32;
    }
    Frame::new(h, w, data).expect("ycbcr_to_rgb")
}

/// Chroma 4:2:0 decimation (2x2 box average).
pub fn chroma_down(plane: &Plane) -> Plane {
    downsample_2x2(plane)
}

/// Chroma 4:2:0 -> full resolution (bilinear).
pub fn chroma_up(plane: &Plane, h: usize, w: usize) -> Plane {
    resize_bilinear(plane, h, w)
}

/// Quantize a value on the 0-255 scale to u8, round half to even.
#[inline]
pub fn quantize_u8(v: f32) -> u8 {
    let v = v.clamp(0.0, 255.0) as f64;
    let floor = v.floor();
    let frac = v - floor;
    let round_up = frac > 0.5 || (frac == 0.5 && !(floor as u64).is_multiple_of(2));
    let q = if round_up { floor + 1.0 } else { floor };
    q.min(255.0) as u8
}

/// Frame -> planar YUV 4:2:0 bytes (I420 layout).
pub fn frame_to_yuv420(frame: &Frame) -> Vec<u8> {
    let [y, cb, cr] = rgb_to_ycbcr(frame);
    let (h, w) = (y.height, y.width);
    let cbd = chroma_down(&cb);
    let crd = chroma_down(&cr);
    let mut out = Vec::with_capacity(h * w + 2 * cbd.data.len());
    out.extend(y.data.iter().map(|v| quantize_u8(*v)));
    out.extend(cbd.data.iter().map(|v| quantize_u8(*v)));
    out.extend(crd.data.iter().map(|v| quantize_u8(*v)));
    out
}

/// Planar YUV 4:2:0 bytes -> Frame.
pub fn yuv420_to_frame(bytes: &[u8], h: usize, w: usize) -> Option<Frame> {
    let (ch, cw) = (h.div_ceil(2), w.div_ceil(2));
    if bytes.len() != h * w + 2 * ch * cw {
        return None;
    }
    let y = Plane::new(h, w, bytes[..h * w].iter().map(|b| *b as f32).collect());
    let cb = Plane::new(
        ch,
        cw,
        bytes[h * w..h * w + ch * cw].iter().map(|b| *b as f32).collect(),
    );
    let cr = Plane::new(
        ch,
        cw,
        bytes[h * w + ch * cw..].iter().map(|b| *b as f32).collect(),
    );
    Some(ycbcr_to_rgb(&[y, chroma_up(&cb, h, w), chroma_up(&cr, h, w)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr_frame;

    #[test]
    fn rgb_ycbcr_round_trip_is_tight() {
        let f = crate::fixtures::natural_frame(32, 32, 6);
        let rt = ycbcr_to_rgb(&rgb_to_ycbcr(&f));
        for (a, b) in rt.data().iter().zip(f.data().iter()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn gray_maps_to_neutral_chroma() {
        let f = Frame::constant(4, 4, 0.5);
        let [y, cb, cr] = rgb_to_ycbcr(&f);
        assert!((y.data[0] - 127.5).abs() < 1e-4);
        assert!((cb.data[0] - 128.0).abs() < 1e-4);
        assert!((cr.data[0] - 128.0).abs() < 1e-4);
    }

    #[test]
    fn round_half_even() {
        assert_eq!(quantize_u8(0.5), 0);
        assert_eq!(quantize_u8(1.5), 2);
        assert_eq!(quantize_u8(2.5), 2);
        assert_eq!(quantize_u8(254.4), 254);
        assert_eq!(quantize_u8(255.0), 255);
        assert_eq!(quantize_u8(-3.0), 0);
    }

    #[test]
    fn yuv420_round_trip_psnr() {
        let f = crate::fixtures::natural_frame(64, 64, 7);
        let bytes = frame_to_yuv420(&f);
        let back = yuv420_to_frame(&bytes, 64, 64).unwrap();
        let p = psnr_frame(&back, &f).unwrap();
        assert!(p > 30.0, "psnr {p}");
        assert!(yuv420_to_frame(&bytes[1..], 64, 64).is_none());
    }
}
