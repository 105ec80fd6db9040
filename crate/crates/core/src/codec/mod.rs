//! Compression degradations: JPEG round-trip and video compression.

pub mod dct;
pub mod jpeg;
pub mod video;
pub mod yuv;

pub use jpeg::{derive_quant_tables, jpeg_roundtrip, ChromaSubsampling, JpegSpec};
pub use video::{
    qp_from_bitrate, video_compress, CodecBackend, VideoCodecSpec, ENCODER_ENV_VAR,
    EXTERNAL_CODECS,
};
