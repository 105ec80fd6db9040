//! External video-backend contract, exercised with a stand-in encoder
//! executable. Lives in its own test binary because it manipulates the
//! process environment.

use std::io::Write;
use std::os::unix::fs::PermissionsExt;

use vidnoise::codec::{video_compress, CodecBackend, VideoCodecSpec, ENCODER_ENV_VAR};
use vidnoise::error::Error;
use vidnoise::fixtures;

/// A fake encoder: stores the raw stream verbatim on encode, plays it back
/// on decode. Exercises the spawn/pipe/validate path without a real codec.
fn write_fake_encoder(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("fake-encoder.sh");
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(body.as_bytes()).unwrap();
    drop(f);
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

const PASSTHROUGH: &str = r#"#!/bin/sh
# decode call: first arg is -i FILE; copy container to stdout
if [ "$1" = "-i" ]; then
    cat "$2"
    exit 0
fi
# encode call: raw frames on stdin, container path is the last argument
out=""
for a in "$@"; do out="$a"; done
cat > "$out"
"#;

const TRUNCATING: &str = r#"#!/bin/sh
if [ "$1" = "-i" ]; then
    head -c 100 "$2"
    exit 0
fi
out=""
for a in "$@"; do out="$a"; done
cat > "$out"
"#;

fn spec() -> VideoCodecSpec {
    VideoCodecSpec {
        backend: CodecBackend::External,
        codec_name: "libx264".into(),
        bitrate: 5.0e4,
        qp: 30,
    }
}

#[test]
fn external_round_trip_through_fake_encoder() {
    let dir = tempfile::tempdir().unwrap();
    let exe = write_fake_encoder(dir.path(), PASSTHROUGH);
    std::env::set_var(ENCODER_ENV_VAR, &exe);

    let clip = fixtures::natural_clip(3, 32, 32, 60);
    let out = video_compress(&clip, &spec()).unwrap();
    assert_eq!(out.len(), clip.len());
    assert_eq!(out.height(), clip.height());
    assert_eq!(out.width(), clip.width());
    // Pass-through container: only the 4:2:0 conversion is lossy.
    let p = vidnoise::metrics::psnr_clip(&out, &clip).unwrap();
    assert!(p > 30.0, "psnr {p}");

    // Dimension/length contract: truncated output is an integrity error.
    let exe = write_fake_encoder(dir.path(), TRUNCATING);
    std::env::set_var(ENCODER_ENV_VAR, &exe);
    match video_compress(&clip, &spec()) {
        Err(Error::Integrity(_)) => {}
        other => panic!("expected integrity error, got {other:?}"),
    }

    std::env::remove_var(ENCODER_ENV_VAR);
    match video_compress(&clip, &spec()) {
        Err(Error::Environment(_)) => {}
        other => panic!("expected environment error, got {other:?}"),
    }
}
