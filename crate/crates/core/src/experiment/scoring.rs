use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{Dataset, Decision, Outcome, TrialSpec};
use crate::error::{Error, Result};
use crate::maskstore::{load_archive, GazePoint, MaskArchive};

/// Radius in stimulus pixels by which the target mask is dilated before a
/// click is judged.
pub const DEFAULT_TOLERANCE_PX: u32 = 10;

/// Scores one decision against the target mask in `archive`.
pub fn score_trial(spec: &TrialSpec, decision: &Decision, archive: &MaskArchive, tolerance_px: u32) -> Result<Outcome> {
    if !spec.target_present {
        return Ok(match decision {
            Decision::Absent => Outcome::TrueNegative,
            Decision::Click { .. } => Outcome::FalsePositiveClaim,
        });
    }
    let target = archive.by_label(&spec.target_label).ok_or_else(|| {
        Error::Data(format!("archive {:?} has no mask labelled {:?}", archive.image_id, spec.target_label))
    })?;
    Ok(match *decision {
        Decision::Absent => Outcome::FalseNegative,
        Decision::Click { x, y } => {
            let (px, py) = GazePoint::new(x, y).pixel(archive.width(), archive.height());
            if target.bitmap().within(px, py, tolerance_px) {
                Outcome::TruePositive
            } else {
                Outcome::FalsePositiveLocation
            }
        }
    })
}

/// Source of outcomes for decided trials.
pub trait Scorer {
    fn score(&self, spec: &TrialSpec, decision: &Decision) -> Result<Outcome>;
}

/// Scores against the dataset's PMSK archives, caching each after first load.
pub struct ArchiveScorer {
    dataset: Dataset,
    tolerance_px: u32,
    cache: Mutex<HashMap<String, Arc<MaskArchive>>>,
}

impl ArchiveScorer {
    pub fn new(dataset: Dataset, tolerance_px: u32) -> Self {
        Self { dataset, tolerance_px, cache: Mutex::new(HashMap::new()) }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn tolerance_px(&self) -> u32 {
        self.tolerance_px
    }

    pub fn archive(&self, image_id: &str) -> Result<Arc<MaskArchive>> {
        if let Some(a) = self.cache.lock().expect("cache lock").get(image_id) {
            return Ok(a.clone());
        }
        let mut a = load_archive(self.dataset.archive_path(image_id)?)?;
        a.image_id = image_id.to_owned();
        let a = Arc::new(a);
        self.cache.lock().expect("cache lock").insert(image_id.to_owned(), a.clone());
        Ok(a)
    }
}

impl Scorer for ArchiveScorer {
    fn score(&self, spec: &TrialSpec, decision: &Decision) -> Result<Outcome> {
        score_trial(spec, decision, &*self.archive(&spec.image_id)?, self.tolerance_px)
    }
}
