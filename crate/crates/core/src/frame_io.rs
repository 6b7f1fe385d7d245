//! Binary buffer container, sequence manifests, and PNG export.
//!
//! A buffer file is a 32-byte little-endian header followed by the raw
//! channel-interleaved `f32` payload:
//!
//! ```text
//! offset  size  field
//!      0     8  magic "GFFEBUF1"
//!      8     4  width
//!     12     4  height
//!     16     4  channels
//!     20     4  dtype (0 = f32)
//!     24     8  reserved, zero
//!     32     -  payload, width * height * channels * 4 bytes
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::buffer::Buffer;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::geometry::{CameraPose, RenderWindow};

pub const MAGIC: &[u8; 8] = b"GFFEBUF1";
pub const HEADER_LEN: usize = 32;
pub const DTYPE_F32: u32 = 0;

pub fn encode_buffer(buf: &Buffer) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + buf.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(buf.width() as u32).to_le_bytes());
    out.extend_from_slice(&(buf.height() as u32).to_le_bytes());
    out.extend_from_slice(&(buf.channels() as u32).to_le_bytes());
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for v in buf.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn decode_buffer(bytes: &[u8]) -> Result<Buffer> {
    let fmt = |field, message: String| Error::Format { field, message };
    if bytes.len() < HEADER_LEN {
        return Err(fmt(
            "header",
            format!("file is {} bytes, header needs {HEADER_LEN}", bytes.len()),
        ));
    }
    if &bytes[..8] != MAGIC {
        return Err(fmt(
            "magic",
            format!("expected {:?}, found {:?}", MAGIC, &bytes[..8]),
        ));
    }
    let width = read_u32(bytes, 8) as usize;
    let height = read_u32(bytes, 12) as usize;
    let channels = read_u32(bytes, 16) as usize;
    let dtype = read_u32(bytes, 20);
    if dtype != DTYPE_F32 {
        return Err(fmt("dtype", format!("unsupported dtype code {dtype}")));
    }
    if bytes[24..32].iter().any(|&b| b != 0) {
        return Err(fmt("reserved", "reserved header bytes must be zero".into()));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| fmt("width", "dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(fmt(
            "payload",
            format!(
                "{} bytes for {width}x{height}x{channels}, expected {expected}",
                payload.len()
            ),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Buffer::from_vec(width, height, channels, data)
}

pub fn write_buffer(buf: &Buffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_buffer(buf)).map_err(|e| Error::io(path, e))
}

pub fn read_buffer(path: impl AsRef<Path>) -> Result<Buffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_buffer(&bytes)
}

/// Display encoding shared by PNG export and the image metrics.
#[inline]
pub fn gamma_encode(v: f32, gamma: f32) -> f32 {
    v.clamp(0.0, 1.0).powf(1.0 / gamma)
}

pub fn to_srgb8(v: f32, gamma: f32) -> u8 {
    (255.0 * gamma_encode(v, gamma)).round() as u8
}

/// Writes a 3-channel linear color buffer as an 8-bit PNG.
pub fn export_png(buf: &Buffer, path: impl AsRef<Path>, gamma: f32) -> Result<()> {
    if buf.channels() != 3 {
        return Err(Error::invalid(format!(
            "PNG export needs 3 channels, got {}",
            buf.channels()
        )));
    }
    let bytes: Vec<u8> = buf.data().iter().map(|&v| to_srgb8(v, gamma)).collect();
    save_rgb8(bytes, buf.width(), buf.height(), path.as_ref())
}

/// Writes a 1-channel mask (values in `[0, 1]`) as a linear grayscale PNG.
pub fn export_mask_png(buf: &Buffer, path: impl AsRef<Path>) -> Result<()> {
    if buf.channels() != 1 {
        return Err(Error::invalid(format!(
            "mask export needs 1 channel, got {}",
            buf.channels()
        )));
    }
    let bytes: Vec<u8> = buf
        .data()
        .iter()
        .flat_map(|&v| {
            let g = (255.0 * v.clamp(0.0, 1.0)).round() as u8;
            [g, g, g]
        })
        .collect();
    save_rgb8(bytes, buf.width(), buf.height(), path.as_ref())
}

fn save_rgb8(bytes: Vec<u8>, w: usize, h: usize, path: &Path) -> Result<()> {
    let img = image::RgbImage::from_raw(w as u32, h as u32, bytes)
        .ok_or_else(|| Error::invalid("PNG dimensions do not match data"))?;
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameRole {
    Rendered,
    Groundtruth,
    Extrapolated,
}

/// One frame of a sequence; buffer paths are relative to the manifest directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub timestamp: f64,
    pub role: FrameRole,
    pub pose: CameraPose,
    pub window: RenderWindow,
    pub color: String,
    pub depth: String,
    pub motion: String,
    pub dynamic_mask: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub scene: String,
    pub seed: u64,
    pub fps_in: u32,
    pub fps_out: u32,
    pub n: u32,
    /// Display resolution.
    pub width: u32,
    pub height: u32,
    pub window_mode: String,
    pub frames: Vec<FrameEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<serde_json::Value>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl SequenceManifest {
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            path: PathBuf::from("<manifest>"),
            source: e,
        })
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads `manifest.json` from a sequence directory (or a direct file path).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_path_buf()
        };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: file,
            source: e,
        })
    }

    pub fn frames_with_role(&self, role: FrameRole) -> impl Iterator<Item = &FrameEntry> {
        self.frames.iter().filter(move |f| f.role == role)
    }

    /// Checks timestamp ordering, cadence, and that every referenced buffer parses.
    pub fn validate(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for pair in self.frames.windows(2) {
            if !(pair[1].timestamp > pair[0].timestamp) {
                return Err(Error::Sequencing(format!(
                    "timestamps not strictly increasing: {} then {}",
                    pair[0].timestamp, pair[1].timestamp
                )));
            }
        }
        let rendered: Vec<usize> = self
            .frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.role == FrameRole::Rendered)
            .map(|(i, _)| i)
            .collect();
        for pair in rendered.windows(2) {
            let between = self.frames[pair[0] + 1..pair[1]]
                .iter()
                .filter(|f| f.role == FrameRole::Groundtruth)
                .count();
            if between != self.n as usize {
                return Err(Error::Sequencing(format!(
                    "expected {} ground-truth frames between rendered frames at {} and {}, found {between}",
                    self.n, self.frames[pair[0]].timestamp, self.frames[pair[1]].timestamp
                )));
            }
        }
        for f in &self.frames {
            for rel in [&f.color, &f.depth, &f.motion, &f.dynamic_mask]
                .into_iter()
                .chain(f.input_mask.as_ref())
                .chain(f.valid_mask.as_ref())
            {
                read_buffer(dir.join(rel))?;
            }
        }
        Ok(())
    }
}

pub fn load_frame(dir: impl AsRef<Path>, entry: &FrameEntry) -> Result<FrameRecord> {
    let dir = dir.as_ref();
    let frame = FrameRecord {
        color: read_buffer(dir.join(&entry.color))?,
        depth: read_buffer(dir.join(&entry.depth))?,
        motion: read_buffer(dir.join(&entry.motion))?,
        dyn_gt: read_buffer(dir.join(&entry.dynamic_mask))?,
        pose: entry.pose,
        window: entry.window,
        timestamp: entry.timestamp,
    };
    frame.validate()?;
    Ok(frame)
}

/// Writes a frame's four buffers as `<stem>_{color,depth,motion,dyn}.buf`.
pub fn save_frame(
    dir: impl AsRef<Path>,
    stem: &str,
    frame: &FrameRecord,
    role: FrameRole,
) -> Result<FrameEntry> {
    let dir = dir.as_ref();
    let name = |kind: &str| format!("{stem}_{kind}.buf");
    let entry = FrameEntry {
        timestamp: frame.timestamp,
        role,
        pose: frame.pose,
        window: frame.window,
        color: name("color"),
        depth: name("depth"),
        motion: name("motion"),
        dynamic_mask: name("dyn"),
        input_mask: None,
        valid_mask: None,
        alpha: None,
    };
    write_buffer(&frame.color, dir.join(&entry.color))?;
    write_buffer(&frame.depth, dir.join(&entry.depth))?;
    write_buffer(&frame.motion, dir.join(&entry.motion))?;
    write_buffer(&frame.dyn_gt, dir.join(&entry.dynamic_mask))?;
    Ok(entry)
}
