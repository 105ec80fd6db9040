//! JPEG round-trip degradation: color conversion, optional 4:2:0 chroma
//! decimation, 8x8 block DCT, quantization against the standard tables scaled
//! by quality, and reconstruction. Entropy coding is lossless and therefore
//! omitted; the pixel effect matches a real encoder's quantization path.

use super::dct;
use super::yuv;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::plane::Plane;
use serde::{Deserialize, Serialize};

/// Annex-K base luminance quantization table.
#[rustfmt::skip]
pub const BASE_LUMA: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Annex-K base chrominance quantization table.
#[rustfmt::skip]
pub const BASE_CHROMA: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Chroma layout of the encoded image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChromaSubsampling {
    #[serde(rename = "4:4:4")]
    Full,
    #[serde(rename = "4:2:0")]
    Half,
}

/// JPEG round-trip parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JpegSpec {
    /// Quality factor, 1..=100 (the degradation sampler draws 30..=95).
    pub quality: u8,
    pub chroma_subsampling: ChromaSubsampling,
}

/// Scale the base tables by quality with the usual convention:
/// scale = 5000/Q below 50 else 200 - 2Q; entry' = clamp((e*scale+50)/100, 1, 255).
pub fn derive_quant_tables(quality: u8) -> Result<([u16; 64], [u16; 64])> {
    if quality == 0 || quality > 100 {
        return Err(Error::Argument(format!("jpeg quality {quality} outside [1,100]")));
    }
    let q = quality as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let derive = |base: &[u16; 64]| {
        let mut t = [0u16; 64];
        for (o, b) in t.iter_mut().zip(base.iter()) {
            *o = (((*b as u32 * scale) + 50) / 100).clamp(1, 255) as u16;
        }
        t
    };
    Ok((derive(&BASE_LUMA), derive(&BASE_CHROMA)))
}

/// Quantize-dequantize one plane through 8x8 block DCT.
/// Values are centered at 128 before the transform.
fn quantize_plane(plane: &Plane, table: &[u16; 64]) -> Plane {
    let (h, w) = (plane.height, plane.width);
    let bh = h.div_ceil(8) * 8;
    let bw = w.div_ceil(8) * 8;
    // Edge-replicated padding to block multiples.
    let mut padded = vec![0.0f64; bh * bw];
    for y in 0..bh {
        for x in 0..bw {
            padded[y * bw + x] = plane.get(y.min(h - 1), x.min(w - 1)) as f64 - 128.0;
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
            for (cf, q) in coefs.iter_mut().zip(table.iter()) {
                let q = *q as f64;
                *cf = (*cf / q).round() * q;
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
            out[y * w + x] = (padded[y * bw + x] + 128.0) as f32;
        }
    }
    Plane::new(h, w, out)
}

/// Encode-decode round trip. Deterministic; output clamped to [0,1].
pub fn jpeg_roundtrip(frame: &Frame, spec: &JpegSpec) -> Result<Frame> {
    let (luma_t, chroma_t) = derive_quant_tables(spec.quality)?;
    let [y, cb, cr] = yuv::rgb_to_ycbcr(frame);
    let (h, w) = (y.height, y.width);

    let y_q = quantize_plane(&y, &luma_t);
    let (cb_q, cr_q) = match spec.chroma_subsampling {
        ChromaSubsampling::Full => (
            quantize_plane(&cb, &chroma_t),
            quantize_plane(&cr, &chroma_t),
        ),
        ChromaSubsampling::Half => {
            let cb_d = quantize_plane(&yuv::chroma_down(&cb), &chroma_t);
            let cr_d = quantize_plane(&yuv::chroma_down(&cr), &chroma_t);
            (yuv::chroma_up(&cb_d, h, w), yuv::chroma_up(&cr_d, h, w))
        }
    };
    Ok(yuv::ycbcr_to_rgb(&[y_q, cb_q, cr_q]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{blockiness, psnr_frame};

    #[test]
    fn quality_50_keeps_base_tables() {
        let (l, c) = derive_quant_tables(50).unwrap();
        assert_eq!(l, BASE_LUMA);
        assert_eq!(c, BASE_CHROMA);
    }

    #[test]
    fn quality_100_floors_to_one() {
        let (l, c) = derive_quant_tables(100).unwrap();
        assert!(l.iter().all(|v| *v == 1));
        assert!(c.iter().all(|v| *v == 1));
    }

    #[test]
    fn quality_30_first_luma_entry() {
        // floor((16 * floor(5000/30) + 50) / 100) = 27.
        let (l, _) = derive_quant_tables(30).unwrap();
        assert_eq!(l[0], 27);
    }

    #[test]
    fn out_of_range_quality_rejected() {
        assert!(derive_quant_tables(0).is_err());
        assert!(derive_quant_tables(101).is_err());
    }

    #[test]
    fn deterministic_round_trip() {
        let f = crate::fixtures::natural_frame(48, 40, 8);
        let spec = JpegSpec {
            quality: 50,
            chroma_subsampling: ChromaSubsampling::Half,
        };
        let a = jpeg_roundtrip(&f, &spec).unwrap();
        let b = jpeg_roundtrip(&f, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_frame_survives_any_quality() {
        // Only the DC coefficient is non-zero; the DC-only oracle predicts
        // the reconstruction exactly: y' = round(8(y-128)/q)*q/8 + 128.
        // Levels chosen away from quantizer half-boundaries.
        for level in [0.21f32, 0.43, 0.5, 0.77] {
            let f = Frame::constant(32, 32, level);
            for q in [30u8, 50, 95] {
                let (luma, _) = derive_quant_tables(q).unwrap();
                // Same luma the converter stores (f32 plane).
                let v = level as f64 * 255.0;
                let y = (0.299 * v + 0.587 * v + 0.114 * v) as f32 as f64;
                let dc = 8.0 * (y - 128.0);
                let y_rec = (dc / luma[0] as f64).round() * luma[0] as f64 / 8.0 + 128.0;
                let out = jpeg_roundtrip(
                    &f,
                    &JpegSpec {
                        quality: q,
                        chroma_subsampling: ChromaSubsampling::Full,
                    },
                )
                .unwrap();
                // Gray input: all channels carry the Y reconstruction.
                for v in out.data() {
                    assert!(
                        (*v as f64 - y_rec / 255.0).abs() < 1e-3,
                        "level {level} quality {q}: {v} vs {}",
                        y_rec / 255.0
                    );
                }
            }
        }
        // Mid-gray sits close to the DC origin, quantizing to > 50 dB at any
        // quality.
        let f = Frame::constant(32, 32, 0.5);
        for q in [30, 50, 95] {
            let out = jpeg_roundtrip(
                &f,
                &JpegSpec {
                    quality: q,
                    chroma_subsampling: ChromaSubsampling::Full,
                },
            )
            .unwrap();
            let p = psnr_frame(&out, &f).unwrap();
            assert!(p > 50.0, "quality {q}: psnr {p}");
        }
    }

    #[test]
    fn psnr_monotone_in_quality() {
        for variant in 0..5 {
            let f = crate::fixtures::natural_frame(64, 64, 20 + variant);
            let mut prev = 0.0;
            for q in [30u8, 50, 70, 95] {
                let out = jpeg_roundtrip(
                    &f,
                    &JpegSpec {
                        quality: q,
                        chroma_subsampling: ChromaSubsampling::Half,
                    },
                )
                .unwrap();
                let p = psnr_frame(&out, &f).unwrap();
                assert!(p >= prev, "variant {variant} quality {q}: {p} < {prev}");
                prev = p;
            }
        }
    }

    #[test]
    fn high_quality_beats_low_by_4db() {
        let f = crate::fixtures::natural_frame(64, 64, 9);
        let p_lo = psnr_frame(
            &jpeg_roundtrip(
                &f,
                &JpegSpec {
                    quality: 30,
                    chroma_subsampling: ChromaSubsampling::Half,
                },
            )
            .unwrap(),
            &f,
        )
        .unwrap();
        let p_hi = psnr_frame(
            &jpeg_roundtrip(
                &f,
                &JpegSpec {
                    quality: 95,
                    chroma_subsampling: ChromaSubsampling::Half,
                },
            )
            .unwrap(),
            &f,
        )
        .unwrap();
        assert!(p_hi >= p_lo + 4.0, "hi {p_hi} lo {p_lo}");
    }

    #[test]
    fn low_quality_is_blockier() {
        let f = crate::fixtures::natural_frame(64, 64, 10);
        let b30 = blockiness(
            &jpeg_roundtrip(
                &f,
                &JpegSpec {
                    quality: 30,
                    chroma_subsampling: ChromaSubsampling::Full,
                },
            )
            .unwrap(),
        );
        let b95 = blockiness(
            &jpeg_roundtrip(
                &f,
                &JpegSpec {
                    quality: 95,
                    chroma_subsampling: ChromaSubsampling::Full,
                },
            )
            .unwrap(),
        );
        assert!(b30 > b95, "b30 {b30} <= b95 {b95}");
    }
}
