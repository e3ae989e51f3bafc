//! The PMSK archive format, all integers little-endian:
//!
//! ```text
//! "PMSK" | u16 version (=1) | u16 width | u16 height | u16 mask count
//! per mask: u32 id | u8 shape class | u16 label length | label (UTF-8)
//!           | u32 area | ceil(width / 8) * height bytes of bitmap rows
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Bitmask, MaskArchive, MaskEntry, ShapeClass};
use crate::error::{Error, FormatError, Result};

const MAGIC: &[u8; 4] = b"PMSK";
const VERSION: u16 = 1;

pub fn encode_archive(a: &MaskArchive) -> Result<Vec<u8>> {
    let stride = Bitmask::stride_for(a.width());
    let mut out = Vec::with_capacity(12 + a.masks().len() * (16 + stride * a.height() as usize));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(a.width() as u16).to_le_bytes());
    out.extend_from_slice(&(a.height() as u16).to_le_bytes());
    out.extend_from_slice(&(a.masks().len() as u16).to_le_bytes());
    for m in a.masks() {
        let label = m.label.as_deref().unwrap_or("").as_bytes();
        let label_len = u16::try_from(label.len())
            .map_err(|_| Error::invalid(format!("mask {} label longer than 65535 bytes", m.id)))?;
        out.extend_from_slice(&m.id.to_le_bytes());
        out.push(m.shape_class.code());
        out.extend_from_slice(&label_len.to_le_bytes());
        out.extend_from_slice(label);
        out.extend_from_slice(&m.area().to_le_bytes());
        out.extend_from_slice(m.bitmap().as_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Decodes and validates an archive. `image_id` is not part of the binary
/// layout and is supplied by the caller.
pub fn decode_archive(bytes: &[u8], image_id: &str) -> Result<MaskArchive, FormatError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4).ok_or(FormatError::TruncatedHeader)?;
    if magic != MAGIC {
        let mut found = [0u8; 4];
        found.copy_from_slice(magic);
        return Err(FormatError::BadMagic { found });
    }
    let version = r.u16().ok_or(FormatError::TruncatedHeader)?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let width = u32::from(r.u16().ok_or(FormatError::TruncatedHeader)?);
    let height = u32::from(r.u16().ok_or(FormatError::TruncatedHeader)?);
    let count = r.u16().ok_or(FormatError::TruncatedHeader)?;
    if width == 0 || height == 0 {
        return Err(FormatError::Dimensions { width, height });
    }
    let stride = Bitmask::stride_for(width);
    let mut masks = Vec::with_capacity(count as usize);
    let mut seen = HashSet::new();
    // Id of the mask being decoded, for truncation reports before the id itself is readable.
    let mut last_id = 0;
    for _ in 0..count {
        let id = r.u32().ok_or(FormatError::Truncated { mask_id: last_id })?;
        last_id = id;
        let truncated = FormatError::Truncated { mask_id: id };
        let code = *r.take(1).ok_or(truncated.clone())?.first().expect("one byte");
        let shape_class = ShapeClass::from_code(code).ok_or(FormatError::ShapeClass { mask_id: id, code })?;
        let label_len = r.u16().ok_or(truncated.clone())?;
        let label = r.take(label_len as usize).ok_or(truncated.clone())?;
        let label = std::str::from_utf8(label).map_err(|_| FormatError::Label { mask_id: id })?;
        let stored = r.u32().ok_or(truncated.clone())?;
        let bits = r.take(stride * height as usize).ok_or(truncated)?;
        let bitmap =
            Bitmask::from_packed(width, height, bits.to_vec()).ok_or(FormatError::Padding { mask_id: id })?;
        let counted = bitmap.count_ones();
        if counted != stored {
            return Err(FormatError::BitCountMismatch { mask_id: id, stored, counted });
        }
        if !seen.insert(id) {
            return Err(FormatError::DuplicateId { mask_id: id });
        }
        let label = (!label.is_empty()).then(|| label.to_owned());
        masks.push(MaskEntry::new(id, label, shape_class, bitmap));
    }
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(MaskArchive { image_id: image_id.to_owned(), width, height, masks })
}

/// Loads an archive; the image id is the file stem.
pub fn load_archive(path: impl AsRef<Path>) -> Result<MaskArchive> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    Ok(decode_archive(&bytes, id)?)
}

pub fn save_archive(a: &MaskArchive, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_archive(a)?).map_err(|e| Error::io(path, e))
}

/// Per-archive JSON sidecar: image id to source file and target-eligible labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArchiveSidecar(pub BTreeMap<String, SidecarEntry>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub source: String,
    pub targets: Vec<String>,
}

impl ArchiveSidecar {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
