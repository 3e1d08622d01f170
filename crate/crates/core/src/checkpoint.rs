//! Binary checkpoint format for a single [`WeightVector`].
//!
//! ```text
//! bytes   field
//! 0..4    magic "IMWA"
//! 4..8    format version, u32 LE (currently 1)
//! 8..12   layer count L, u32 LE
//! ..      L pairs of (in_width, out_width), u32 LE each
//! ..      param_count values, f64 LE, in WeightVector order
//! ```
//!
//! Nothing may follow the last value.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{LayerLayout, WeightVector};

pub const MAGIC: &[u8; 4] = b"IMWA";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode(w: &WeightVector) -> Vec<u8> {
    let dims = w.layout().dims();
    let mut buf = Vec::with_capacity(12 + dims.len() * 8 + w.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &(fan_in, fan_out) in dims {
        buf.extend_from_slice(&(fan_in as u32).to_le_bytes());
        buf.extend_from_slice(&(fan_out as u32).to_le_bytes());
    }
    for v in w.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> std::result::Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(format!(
                "truncated while reading {what} at byte {} (file has {} bytes)",
                self.pos,
                self.bytes.len()
            )),
        }
    }

    fn u32(&mut self, what: &str) -> std::result::Result<u32, String> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn decode_inner(bytes: &[u8]) -> std::result::Result<WeightVector, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err("missing IMWA magic bytes".into());
    }
    let version = r.u32("format version")?;
    if version != FORMAT_VERSION {
        return Err(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        ));
    }
    let layers = r.u32("layer count")? as usize;
    // Each layer needs 8 header bytes; reject absurd counts before allocating.
    if layers > bytes.len() / 8 {
        return Err(format!("layer count {layers} exceeds file size"));
    }
    let mut dims = Vec::with_capacity(layers);
    for i in 0..layers {
        let fan_in = r.u32(&format!("layer {i} input width"))? as usize;
        let fan_out = r.u32(&format!("layer {i} output width"))? as usize;
        dims.push((fan_in, fan_out));
    }
    let layout = LayerLayout::new(dims).map_err(|e| e.to_string())?;
    let count = layout.param_count();
    let raw = r.take(count * 8, "parameter values")?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if r.pos != bytes.len() {
        return Err(format!(
            "{} trailing bytes after parameter values",
            bytes.len() - r.pos
        ));
    }
    WeightVector::new(layout, values).map_err(|e| e.to_string())
}

/// Decodes a checkpoint held in memory; `origin` names it in errors.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<WeightVector> {
    decode_inner(bytes).map_err(|message| Error::Format {
        path: origin.to_path_buf(),
        message,
    })
}

pub fn save(w: &WeightVector, path: &Path) -> Result<()> {
    fs::write(path, encode(w)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<WeightVector> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
