//! On-disk run artifacts: bit-packed PBM mask streams, a TOML manifest with
//! the embedded config and its hash, and line-oriented JSON ground-truth
//! and event logs.
//!
//! Layout under a run directory:
//!
//! ```text
//! manifest.toml
//! masks/cam_<name>/frame_<%06d>/<category>.pbm
//! ground_truth.jsonl
//! events.jsonl
//! metrics/*.txt, *.json
//! ```
//!
//! Every artifact is byte-reproducible from (config, seed): map keys are
//! ordered, floats print in shortest round-trip form, and frames are laid
//! out by index.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::model::{CameraId, CategoryId, FrameBundle, Mask};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Encode a mask as a binary PBM (magic "P4", bit 1 = foreground, rows
/// packed MSB-first and padded to whole bytes).
pub fn encode_pbm(mask: &Mask) -> Vec<u8> {
    let (width, height) = mask.resolution();
    let row_bytes = width.div_ceil(8) as usize;
    let mut out = format!("P4\n{width} {height}\n").into_bytes();
    out.reserve(row_bytes * height as usize);
    for row in 0..height {
        for byte_idx in 0..row_bytes {
            let mut byte = 0u8;
            for bit in 0..8 {
                let col = (byte_idx * 8 + bit) as u32;
                if col < width && mask.get(row, col) {
                    byte |= 0x80 >> bit;
                }
            }
            out.push(byte);
        }
    }
    out
}

/// Decode a binary PBM produced by [`encode_pbm`] (or any P4 file with
/// `#` comments in the header).
pub fn decode_pbm(bytes: &[u8]) -> Result<Mask> {
    let mut pos = 0usize;
    let err = |reason: &str| Error::format("pbm", reason);

    if bytes.len() < 2 || &bytes[0..2] != b"P4" {
        return Err(err("missing P4 magic"));
    }
    pos += 2;

    let read_number = |pos: &mut usize| -> Result<u32> {
        // skip whitespace and comments
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::format("pbm", "expected a decimal number"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("pbm", "bad number"))
    };

    let width = read_number(&mut pos)?;
    let height = read_number(&mut pos)?;
    if width < 1 || height < 1 {
        return Err(err("zero dimension"));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(err("missing raster separator"));
    }
    pos += 1;

    let row_bytes = width.div_ceil(8) as usize;
    let expected = row_bytes * height as usize;
    if bytes.len() - pos < expected {
        return Err(err("truncated raster"));
    }
    let mut mask = Mask::empty(width, height);
    for row in 0..height {
        for byte_idx in 0..row_bytes {
            let byte = bytes[pos + row as usize * row_bytes + byte_idx];
            if byte == 0 {
                continue;
            }
            for bit in 0..8 {
                if byte & (0x80 >> bit) != 0 {
                    let col = (byte_idx * 8 + bit) as u32;
                    if col < width {
                        mask.set(row, col);
                    }
                }
            }
        }
    }
    Ok(mask)
}

/// Run manifest: stream shape plus the full resolved config, so any
/// consumer (monitoring, metrics, ground-truth re-rendering) needs only the
/// run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub config_hash: String,
    pub fps: f64,
    pub frame_count: u64,
    pub cameras: Vec<String>,
    pub categories: Vec<String>,
    pub config: ScenarioConfig,
}

/// SHA-256 of the canonical config serialization.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.to_canonical_toml().as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

impl Manifest {
    pub fn for_config(config: &ScenarioConfig) -> Manifest {
        Manifest {
            format_version: MANIFEST_FORMAT_VERSION,
            config_hash: config_hash(config),
            fps: config.fps,
            frame_count: config.frame_count(),
            cameras: config.cameras.iter().map(|c| c.name.clone()).collect(),
            categories: config.categories.clone(),
            config: config.clone(),
        }
    }
}

/// One ground-truth line: a (frame, pair) unit with per-view exact
/// distances (`null` = pair not visible in that view), the world-unit gap,
/// and the all-view warning label (`null` = undefined, no view sees it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub frame_index: u64,
    pub pair: [String; 2],
    pub px: BTreeMap<String, Option<f64>>,
    pub world_gap: Option<f64>,
    pub warning: Option<bool>,
}

/// One event-log line: the fused decision for a (frame, pair) unit with
/// the per-view measured distances that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub frame_index: u64,
    pub pair: [String; 2],
    pub d: BTreeMap<String, Option<f64>>,
    pub raw: bool,
    pub confirmed: bool,
    pub status: EventStatus,
}

/// Data quality of the views behind a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventStatus {
    /// Every contributing view ran on fresh masks.
    Ok,
    /// At least one contributing view ran on substituted or lost masks.
    Degraded,
    /// No view could see the pair this frame.
    Unknown,
}

/// Paths inside one run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.toml")
    }

    pub fn masks_dir(&self) -> PathBuf {
        self.root.join("masks")
    }

    pub fn ground_truth_path(&self) -> PathBuf {
        self.root.join("ground_truth.jsonl")
    }

    pub fn events_path(&self) -> PathBuf {
        self.root.join("events.jsonl")
    }

    pub fn metrics_dir(&self) -> PathBuf {
        self.root.join("metrics")
    }

    pub fn frame_dir(&self, camera_name: &str, frame_index: u64) -> PathBuf {
        self.masks_dir()
            .join(format!("cam_{camera_name}"))
            .join(format!("frame_{frame_index:06}"))
    }

    pub fn mask_path(&self, camera_name: &str, frame_index: u64, category: &str) -> PathBuf {
        self.frame_dir(camera_name, frame_index)
            .join(format!("{category}.pbm"))
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        fs::create_dir_all(&self.root)?;
        let text = toml::to_string_pretty(manifest)
            .map_err(|e| Error::format("manifest", e.to_string()))?;
        fs::write(self.manifest_path(), text)?;
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        let text = fs::read_to_string(self.manifest_path())?;
        let manifest: Manifest =
            toml::from_str(&text).map_err(|e| Error::format("manifest", e.message()))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::format(
                "manifest",
                format!("unsupported format_version {}", manifest.format_version),
            ));
        }
        Ok(manifest)
    }

    /// Write one frame's bundles (one per camera). Frame directories exist
    /// even when a camera saw nothing, so readers can distinguish "nothing
    /// visible" from "missing frame".
    pub fn write_frame(
        &self,
        manifest: &Manifest,
        bundles: &[FrameBundle],
        frame_index: u64,
    ) -> Result<()> {
        for bundle in bundles {
            let cam_name = &manifest.cameras[bundle.camera.0];
            let dir = self.frame_dir(cam_name, frame_index);
            fs::create_dir_all(&dir)?;
            for (cat, mask) in &bundle.masks {
                let cat_name = &manifest.categories[cat.0 as usize];
                fs::write(dir.join(format!("{cat_name}.pbm")), encode_pbm(mask))?;
            }
        }
        Ok(())
    }

    /// Read one frame's bundles in camera order. A missing frame directory
    /// is a stream gap; a missing category file is an absent category.
    pub fn read_frame(&self, manifest: &Manifest, frame_index: u64) -> Result<Vec<FrameBundle>> {
        let mut bundles = Vec::with_capacity(manifest.cameras.len());
        for (ci, cam_name) in manifest.cameras.iter().enumerate() {
            let dir = self.frame_dir(cam_name, frame_index);
            if !dir.is_dir() {
                return Err(Error::StreamGap { frame_index });
            }
            let mut bundle = FrameBundle::new(CameraId(ci), frame_index, manifest.fps);
            for (cat_idx, cat_name) in manifest.categories.iter().enumerate() {
                let path = dir.join(format!("{cat_name}.pbm"));
                if !path.is_file() {
                    continue;
                }
                let mask = decode_pbm(&fs::read(&path)?)?;
                bundle.masks.insert(CategoryId(cat_idx as u16), mask);
            }
            bundles.push(bundle);
        }
        Ok(bundles)
    }
}

/// Append-only JSONL writer.
pub struct JsonlWriter<T> {
    file: std::io::BufWriter<fs::File>,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Serialize> JsonlWriter<T> {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(JsonlWriter {
            file: std::io::BufWriter::new(fs::File::create(path)?),
            _marker: std::marker::PhantomData,
        })
    }

    pub fn append(&mut self, record: &T) -> Result<()> {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::format("jsonl", e.to_string()))?;
        self.file.write_all(line.as_bytes())?;
        self.file.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.file.flush()?;
        Ok(())
    }
}

/// Read a whole JSONL file.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| {
            Error::format(
                format!("{}:{}", path.display(), i + 1),
                e.to_string(),
            )
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pbm_header_and_size() {
        let mut m = Mask::empty(10, 3);
        m.set(0, 0);
        m.set(2, 9);
        let bytes = encode_pbm(&m);
        assert!(bytes.starts_with(b"P4\n10 3\n"));
        // 2 bytes per row, 3 rows
        assert_eq!(bytes.len(), "P4\n10 3\n".len() + 6);
        let back = decode_pbm(&bytes).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn pbm_msb_first_packing() {
        let mut m = Mask::empty(8, 1);
        m.set(0, 0);
        let bytes = encode_pbm(&m);
        assert_eq!(*bytes.last().unwrap(), 0x80); // col 0 = most significant bit
    }

    #[test]
    fn pbm_rejects_garbage() {
        assert!(decode_pbm(b"P1\n2 2\n0 1 1 0").is_err());
        assert!(decode_pbm(b"P4\n10 3\n\x00").is_err()); // truncated
        assert!(decode_pbm(b"P4\nx 3\n").is_err());
    }

    #[test]
    fn pbm_accepts_header_comments() {
        let mut m = Mask::empty(9, 2);
        m.set(1, 8);
        let bytes = encode_pbm(&m);
        let with_comment = [
            b"P4\n# a comment\n9 2\n".to_vec(),
            bytes["P4\n9 2\n".len()..].to_vec(),
        ]
        .concat();
        assert_eq!(decode_pbm(&with_comment).unwrap(), m);
    }

    proptest! {
        #[test]
        fn pbm_round_trips(
            w in 1u32..130,
            h in 1u32..10,
            px in proptest::collection::vec((0u32..10, 0u32..130), 0..60),
        ) {
            let mask = Mask::from_pixels(
                w,
                h,
                px.into_iter().filter(|&(r, c)| r < h && c < w),
            );
            let encoded = encode_pbm(&mask);
            prop_assert_eq!(decode_pbm(&encoded).unwrap(), mask);
        }
    }

    fn minimal_config() -> ScenarioConfig {
        ScenarioConfig::from_toml_str(
            r#"
name = "t"
fps = 10.0
duration_s = 0.3
categories = ["holder"]
[[cameras]]
name = "front"
view = "front"
width = 32
height = 32
scale = 10.0
origin_row = 16.0
origin_col = 16.0
[[objects]]
category = "holder"
half_extents = [1.0, 1.0, 1.0]
waypoints = [{ t = 0.0, center = [0.0, 0.0, 0.0] }]
"#,
        )
        .unwrap()
    }

    #[test]
    fn manifest_round_trips_with_hash() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::new(dir.path());
        let config = minimal_config();
        let manifest = Manifest::for_config(&config);
        assert!(manifest.config_hash.starts_with("sha256:"));
        run.write_manifest(&manifest).unwrap();
        let back = run.read_manifest().unwrap();
        assert_eq!(back, manifest);
        assert_eq!(config_hash(&back.config), back.config_hash);
    }

    #[test]
    fn frame_write_read_round_trip_and_gap_detection() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::new(dir.path());
        let config = minimal_config();
        let manifest = Manifest::for_config(&config);

        let mut bundle = FrameBundle::new(CameraId(0), 0, 10.0);
        let mut m = Mask::empty(32, 32);
        m.fill_rect(3, 9, 4, 11);
        bundle.masks.insert(CategoryId(0), m.clone());
        run.write_frame(&manifest, &[bundle], 0).unwrap();

        let back = run.read_frame(&manifest, 0).unwrap();
        assert_eq!(back[0].masks[&CategoryId(0)], m);

        match run.read_frame(&manifest, 1) {
            Err(Error::StreamGap { frame_index }) => assert_eq!(frame_index, 1),
            other => panic!("expected stream gap, got {other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trips_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut w: JsonlWriter<EventRecord> = JsonlWriter::create(&path).unwrap();
        let rec = EventRecord {
            frame_index: 3,
            pair: ["holder".into(), "detector".into()],
            d: [("front".to_string(), Some(4.5)), ("top".to_string(), None)]
                .into_iter()
                .collect(),
            raw: true,
            confirmed: false,
            status: EventStatus::Ok,
        };
        w.append(&rec).unwrap();
        w.finish().unwrap();
        let back: Vec<EventRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, vec![rec]);

        std::fs::write(&path, "{not json\n").unwrap();
        let err = read_jsonl::<EventRecord>(&path).unwrap_err();
        assert!(err.to_string().contains(":1"), "{err}");
    }
}
