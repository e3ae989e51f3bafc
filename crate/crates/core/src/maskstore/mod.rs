//! Precomputed segmentation masks: storage in the PMSK archive format,
//! gaze-time lookup, and composition of the gaze-controlled stimulus.

mod archive;
mod bitmask;
mod compose;
mod synth;

pub use archive::{decode_archive, encode_archive, load_archive, save_archive, ArchiveSidecar, SidecarEntry};
pub use bitmask::Bitmask;
pub use compose::{compose_gcss, select_masks, SelectionPolicy, DEFAULT_EDGE_GAIN};
pub use synth::{synth_scene, ObjectSpec, SceneSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coarse object geometry used to group targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Rectangle,
    Sphere,
    Cylinder,
    Other,
}

impl ShapeClass {
    pub fn code(self) -> u8 {
        match self {
            ShapeClass::Rectangle => 0,
            ShapeClass::Sphere => 1,
            ShapeClass::Cylinder => 2,
            ShapeClass::Other => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => ShapeClass::Rectangle,
            1 => ShapeClass::Sphere,
            2 => ShapeClass::Cylinder,
            3 => ShapeClass::Other,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskEntry {
    pub id: u32,
    pub label: Option<String>,
    pub shape_class: ShapeClass,
    bitmap: Bitmask,
    area: u32,
}

impl MaskEntry {
    pub fn new(id: u32, label: Option<String>, shape_class: ShapeClass, bitmap: Bitmask) -> Self {
        let area = bitmap.count_ones();
        Self { id, label, shape_class, bitmap, area }
    }

    pub fn bitmap(&self) -> &Bitmask {
        &self.bitmap
    }

    /// Number of set pixels; always equal to the bitmap popcount.
    pub fn area(&self) -> u32 {
        self.area
    }
}

/// Gaze sample in stimulus pixel coordinates; `t` is ms since trial onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazePoint {
    pub x: f64,
    pub y: f64,
    pub t: u64,
}

impl GazePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, t: 0 }
    }

    /// Nearest pixel inside a `width` x `height` frame. Off-frame gaze clamps
    /// to the border.
    pub fn pixel(&self, width: u32, height: u32) -> (u32, u32) {
        let clamp = |v: f64, n: u32| {
            if v.is_nan() {
                0
            } else {
                v.floor().clamp(0.0, f64::from(n - 1)) as u32
            }
        };
        (clamp(self.x, width), clamp(self.y, height))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskArchive {
    pub image_id: String,
    width: u32,
    height: u32,
    masks: Vec<MaskEntry>,
}

impl MaskArchive {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 || width > u32::from(u16::MAX) || height > u32::from(u16::MAX) {
            return Err(Error::invalid(format!("archive dimensions {width}x{height} out of range")));
        }
        Ok(Self { image_id: image_id.into(), width, height, masks: Vec::new() })
    }

    pub fn push(&mut self, entry: MaskEntry) -> Result<()> {
        if entry.bitmap.width() != self.width || entry.bitmap.height() != self.height {
            return Err(Error::invalid(format!(
                "mask {} is {}x{}, archive is {}x{}",
                entry.id,
                entry.bitmap.width(),
                entry.bitmap.height(),
                self.width,
                self.height
            )));
        }
        if self.masks.iter().any(|m| m.id == entry.id) {
            return Err(Error::invalid(format!("duplicate mask id {}", entry.id)));
        }
        if self.masks.len() >= usize::from(u16::MAX) {
            return Err(Error::invalid("archive holds at most 65535 masks"));
        }
        self.masks.push(entry);
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn masks(&self) -> &[MaskEntry] {
        &self.masks
    }

    pub fn get(&self, id: u32) -> Option<&MaskEntry> {
        self.masks.iter().find(|m| m.id == id)
    }

    pub fn by_label(&self, label: &str) -> Option<&MaskEntry> {
        self.masks.iter().find(|m| m.label.as_deref() == Some(label))
    }

    /// Ids of every mask set at the gaze pixel, in archive order.
    pub fn masks_at(&self, g: &GazePoint) -> Vec<u32> {
        let (x, y) = g.pixel(self.width, self.height);
        self.masks.iter().filter(|m| m.bitmap.get(x, y)).map(|m| m.id).collect()
    }
}
