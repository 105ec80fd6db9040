//! Clip I/O: directories of 8-bit RGB PNG frames (lexicographic order) and
//! single-file Y4M containers (8-bit 4:2:0).
//!
//! Samples map to [0,1] by /255 on load; writes quantize with
//! round-half-to-even. All pixel processing stays real-valued in between.

use std::fs;
use std::path::{Path, PathBuf};

use image::ImageReader;
use vidnoise::codec::yuv;
use vidnoise::error::{Error, Result};
use vidnoise::frame::{Clip, Frame};

/// One discovered clip source.
#[derive(Clone, Debug)]
pub struct ClipSource {
    /// Name used in manifests and for the output layout.
    pub name: String,
    pub kind: ClipSourceKind,
}

#[derive(Clone, Debug)]
pub enum ClipSourceKind {
    /// Directory of PNG frames; paths sorted lexicographically.
    PngDir { frames: Vec<PathBuf> },
    /// Single Y4M file.
    Y4m { path: PathBuf },
}

/// Find clips under `input`: each subdirectory containing PNGs is a clip,
/// each `.y4m` file is a clip; a directory that itself holds PNGs is a
/// single clip. Results sorted by name.
pub fn discover_clips(input: &Path) -> Result<Vec<ClipSource>> {
    if !input.is_dir() {
        if input.extension().is_some_and(|e| e.eq_ignore_ascii_case("y4m")) {
            return Ok(vec![ClipSource {
                name: stem_of(input),
                kind: ClipSourceKind::Y4m {
                    path: input.to_path_buf(),
                },
            }]);
        }
        return Err(Error::Argument(format!(
            "input {} is neither a directory nor a .y4m file",
            input.display()
        )));
    }

    let direct_frames = png_frames_in(input)?;
    if !direct_frames.is_empty() {
        return Ok(vec![ClipSource {
            name: stem_of(input),
            kind: ClipSourceKind::PngDir {
                frames: direct_frames,
            },
        }]);
    }

    let mut clips = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(input)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .collect();
    entries.sort();
    for entry in entries {
        if entry.is_dir() {
            let frames = png_frames_in(&entry)?;
            if !frames.is_empty() {
                clips.push(ClipSource {
                    name: stem_of(&entry),
                    kind: ClipSourceKind::PngDir { frames },
                });
            }
        } else if entry
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("y4m"))
        {
            clips.push(ClipSource {
                name: stem_of(&entry),
                kind: ClipSourceKind::Y4m { path: entry },
            });
        }
    }
    if clips.is_empty() {
        return Err(Error::Argument(format!(
            "no clips found under {}",
            input.display()
        )));
    }
    Ok(clips)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "clip".into())
}

fn png_frames_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    frames.sort();
    Ok(frames)
}

/// Load a clip from a source.
pub fn load_clip(source: &ClipSource) -> Result<Clip> {
    match &source.kind {
        ClipSourceKind::PngDir { frames, .. } => {
            let mut out = Vec::with_capacity(frames.len());
            for path in frames {
                out.push(load_png(path)?);
            }
            Clip::new(out)
        }
        ClipSourceKind::Y4m { path } => read_y4m(path),
    }
}

/// Load one PNG as an RGB frame in [0,1].
pub fn load_png(path: &Path) -> Result<Frame> {
    let img = ImageReader::open(path)?
        .decode()
        .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.as_raw().iter().map(|b| *b as f32 / 255.0).collect();
    Frame::new(h, w, data)
}

/// Write one frame as 8-bit RGB PNG (round-half-to-even quantization).
pub fn save_png(frame: &Frame, path: &Path) -> Result<()> {
    let (h, w) = (frame.height(), frame.width());
    let bytes: Vec<u8> = frame
        .data()
        .iter()
        .map(|v| yuv::quantize_u8(v * 255.0))
        .collect();
    let img = image::RgbImage::from_raw(w as u32, h as u32, bytes)
        .expect("raster length matches dimensions");
    img.save(path)
        .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

/// Write a clip next to `source`'s layout: PNG directories keep their frame
/// file names; Y4M sources write a Y4M file.
pub fn save_clip_like(source: &ClipSource, clip: &Clip, out_root: &Path) -> Result<()> {
    match &source.kind {
        ClipSourceKind::PngDir { frames, .. } => {
            let dir = out_root.join(&source.name);
            fs::create_dir_all(&dir)?;
            for (frame, src_path) in clip.frames().iter().zip(frames.iter()) {
                let file = src_path.file_name().expect("frame file name");
                save_png(frame, &dir.join(file))?;
            }
            Ok(())
        }
        ClipSourceKind::Y4m { .. } => {
            fs::create_dir_all(out_root)?;
            write_y4m(clip, &out_root.join(format!("{}.y4m", source.name)))
        }
    }
}

/// Save a clip as a directory of numbered PNG frames.
pub fn save_clip_pngs(clip: &Clip, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in clip.frames().iter().enumerate() {
        save_png(frame, &dir.join(format!("frame_{i:04}.png")))?;
    }
    Ok(())
}

/// Parse an 8-bit 4:2:0 Y4M stream.
pub fn read_y4m(path: &Path) -> Result<Clip> {
    let bytes = fs::read(path)?;
    let header_end = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| Error::Argument("y4m: missing header terminator".into()))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::Argument("y4m: non-utf8 header".into()))?;
    let mut parts = header.split(' ');
    if parts.next() != Some("YUV4MPEG2") {
        return Err(Error::Argument("y4m: bad magic".into()));
    }
    let (mut w, mut h) = (0usize, 0usize);
    let mut rate = None;
    let mut colorspace = "420".to_string();
    for p in parts {
        match p.chars().next() {
            Some('W') => w = p[1..].parse().unwrap_or(0),
            Some('H') => h = p[1..].parse().unwrap_or(0),
            Some('F') => {
                if let Some((num, den)) = p[1..].split_once(':') {
                    let (n, d): (f64, f64) =
                        (num.parse().unwrap_or(0.0), den.parse().unwrap_or(1.0));
                    if n > 0.0 && d > 0.0 {
                        rate = Some(n / d);
                    }
                }
            }
            Some('C') => colorspace = p[1..].to_string(),
            _ => {}
        }
    }
    if w == 0 || h == 0 {
        return Err(Error::Argument("y4m: missing dimensions".into()));
    }
    if !matches!(colorspace.as_str(), "420" | "420jpeg" | "420mpeg2" | "420paldv") {
        return Err(Error::Argument(format!(
            "y4m: unsupported colorspace C{colorspace} (8-bit 4:2:0 required)"
        )));
    }
    let frame_bytes = h * w + 2 * (h.div_ceil(2) * w.div_ceil(2));
    let mut frames = Vec::new();
    let mut pos = header_end + 1;
    while pos < bytes.len() {
        let line_end = bytes[pos..]
            .iter()
            .position(|b| *b == b'\n')
            .ok_or_else(|| Error::Argument("y4m: truncated frame header".into()))?
            + pos;
        if !bytes[pos..].starts_with(b"FRAME") {
            return Err(Error::Argument("y4m: expected FRAME marker".into()));
        }
        let data_start = line_end + 1;
        let data_end = data_start + frame_bytes;
        if data_end > bytes.len() {
            return Err(Error::Argument("y4m: truncated frame payload".into()));
        }
        frames.push(
            yuv::yuv420_to_frame(&bytes[data_start..data_end], h, w)
                .ok_or_else(|| Error::Argument("y4m: frame size mismatch".into()))?,
        );
        pos = data_end;
    }
    Clip::with_rate_hint(frames, rate)
}

/// Write an 8-bit 4:2:0 Y4M stream (frame rate from the clip hint, default 24).
pub fn write_y4m(clip: &Clip, path: &Path) -> Result<()> {
    let rate = clip.frame_rate_hint().unwrap_or(24.0);
    // Encode the rate as a rational with millihertz resolution.
    let num = (rate * 1000.0).round() as u64;
    let mut out = Vec::new();
    out.extend_from_slice(
        format!(
            "YUV4MPEG2 W{} H{} F{}:1000 Ip A1:1 C420jpeg\n",
            clip.width(),
            clip.height(),
            num
        )
        .as_bytes(),
    );
    for frame in clip.frames() {
        out.extend_from_slice(b"FRAME\n");
        out.extend_from_slice(&yuv::frame_to_yuv420(frame));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use vidnoise::fixtures;

    #[test]
    fn png_round_trip_is_exact_on_quantized_data() {
        let dir = tempfile::tempdir().unwrap();
        let clip = fixtures::natural_clip(2, 24, 24, 40);
        save_clip_pngs(&clip, dir.path()).unwrap();
        let sources = discover_clips(dir.path()).unwrap();
        assert_eq!(sources.len(), 1);
        let loaded = load_clip(&sources[0]).unwrap();
        // Quantize the original the same way and compare.
        for (a, b) in loaded.frames().iter().zip(clip.frames().iter()) {
            for (x, y) in a.data().iter().zip(b.data().iter()) {
                let q = yuv::quantize_u8(y * 255.0) as f32 / 255.0;
                assert_eq!(*x, q);
            }
        }
    }

    #[test]
    fn y4m_round_trip_preserves_shape_and_rate() {
        let dir = tempfile::tempdir().unwrap();
        let clip = fixtures::natural_clip(3, 32, 20, 41);
        let path = dir.path().join("test.y4m");
        write_y4m(&clip, &path).unwrap();
        let loaded = read_y4m(&path).unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded.height(), 32);
        assert_eq!(loaded.width(), 20);
        assert_eq!(loaded.frame_rate_hint(), Some(24.0));
        // 4:2:0 is lossy in chroma; luma-dominant content survives well.
        let p = vidnoise::metrics::psnr_clip(&loaded, &clip).unwrap();
        assert!(p > 30.0, "psnr {p}");
    }

    #[test]
    fn discover_finds_subdir_clips_and_y4m() {
        let dir = tempfile::tempdir().unwrap();
        let a = fixtures::natural_clip(2, 16, 16, 42);
        save_clip_pngs(&a, &dir.path().join("clip_a")).unwrap();
        write_y4m(&a, &dir.path().join("clip_b.y4m")).unwrap();
        let found = discover_clips(dir.path()).unwrap();
        let names: Vec<&str> = found.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["clip_a", "clip_b"]);
    }

    #[test]
    fn empty_input_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(discover_clips(dir.path()).is_err());
    }

    #[test]
    fn bad_y4m_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.y4m");
        std::fs::write(&path, b"YUV4MPEG2 W0 H0\n").unwrap();
        assert!(read_y4m(&path).is_err());
        std::fs::write(&path, b"NOTY4M W4 H4\nFRAME\n").unwrap();
        assert!(read_y4m(&path).is_err());
    }
}
