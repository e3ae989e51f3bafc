use serde::{Deserialize, Serialize};

use super::{GazePoint, MaskArchive};
use crate::error::{Error, Result};
use crate::imaging::GrayFrame;

/// Edge overlay strength relative to the highlighted mask.
pub const DEFAULT_EDGE_GAIN: f64 = 0.3;

/// How overlapping masks under the gaze point are resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    /// Highlight every mask containing the gaze pixel.
    #[default]
    Union,
    /// Highlight only the smallest containing mask (first wins on ties).
    SmallestArea,
}

impl std::fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionPolicy::Union => "union",
            SelectionPolicy::SmallestArea => "smallest-area",
        })
    }
}

impl std::str::FromStr for SelectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(SelectionPolicy::Union),
            "smallest-area" => Ok(SelectionPolicy::SmallestArea),
            other => Err(Error::invalid(format!("unknown selection policy {other:?}"))),
        }
    }
}

pub fn select_masks(a: &MaskArchive, g: &GazePoint, policy: SelectionPolicy) -> Vec<u32> {
    let hits = a.masks_at(g);
    match policy {
        SelectionPolicy::Union => hits,
        SelectionPolicy::SmallestArea => hits
            .iter()
            .filter_map(|&id| a.get(id))
            .min_by_key(|m| m.area())
            .map(|m| vec![m.id])
            .unwrap_or_default(),
    }
}

/// Gaze-controlled stimulus: selected masks at full intensity over edges
/// scaled by `edge_gain`, clamped to [0, 1].
pub fn compose_gcss(
    a: &MaskArchive,
    g: &GazePoint,
    edges: &GrayFrame,
    edge_gain: f64,
    policy: SelectionPolicy,
) -> Result<GrayFrame> {
    if edges.width() != a.width() || edges.height() != a.height() {
        return Err(Error::invalid(format!(
            "edge frame {}x{} does not match archive {}x{}",
            edges.width(),
            edges.height(),
            a.width(),
            a.height()
        )));
    }
    if !(0.0..=1.0).contains(&edge_gain) {
        return Err(Error::invalid(format!("edge_gain {edge_gain} outside [0, 1]")));
    }
    let mut out: Vec<f64> = edges.data().iter().map(|e| (edge_gain * e).min(1.0)).collect();
    let w = a.width() as usize;
    for id in select_masks(a, g, policy) {
        let mask = a.get(id).expect("selected ids come from the archive").bitmap();
        let stride = mask.stride();
        for (y, row) in mask.as_bytes().chunks(stride).enumerate() {
            let base = y * w;
            for (bx, &byte) in row.iter().enumerate() {
                if byte == 0 {
                    continue;
                }
                let x0 = bx * 8;
                if byte == 0xff {
                    out[base + x0..base + x0 + 8].fill(1.0);
                    continue;
                }
                for bit in 0..8 {
                    if byte & (0x80 >> bit) != 0 {
                        out[base + x0 + bit] = 1.0;
                    }
                }
            }
        }
    }
    Ok(GrayFrame::from_raw(a.width(), a.height(), out))
}
