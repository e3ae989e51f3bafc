use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClutterLevel, TargetShape, FALSE_TRIALS, QUOTAS};
use crate::error::{Error, Result};
use crate::imaging::save_rgb;
use crate::maskstore::{save_archive, synth_scene, ArchiveSidecar, ObjectSpec, SceneSpec, ShapeClass, SidecarEntry};

/// A candidate image-target pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub target_label: String,
    pub target_present: bool,
    pub shape: TargetShape,
    /// Target shares its shape with another object and could only be told
    /// apart by color; never eligible.
    #[serde(default)]
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub image_id: String,
    /// Scene image, relative to the manifest directory.
    pub image: Option<PathBuf>,
    /// PMSK archive, relative to the manifest directory.
    pub archive: Option<PathBuf>,
    pub object_count: u32,
    pub candidates: Vec<Candidate>,
}

impl SceneEntry {
    pub fn clutter(&self) -> Option<ClutterLevel> {
        ClutterLevel::from_object_count(self.object_count)
    }
}

/// Dataset manifest (`dataset.json`) plus the directory it was loaded from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub scenes: Vec<SceneEntry>,
    #[serde(skip)]
    pub root: PathBuf,
}

impl Dataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut ds: Dataset = serde_json::from_str(&text)?;
        ds.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn scene(&self, image_id: &str) -> Option<&SceneEntry> {
        self.scenes.iter().find(|s| s.image_id == image_id)
    }

    pub fn archive_path(&self, image_id: &str) -> Result<PathBuf> {
        let scene = self.scene(image_id).ok_or_else(|| Error::NotFound(format!("scene {image_id:?}")))?;
        let rel = scene.archive.as_ref().ok_or_else(|| Error::Data(format!("scene {image_id:?} has no archive")))?;
        Ok(self.root.join(rel))
    }

    pub fn image_path(&self, image_id: &str) -> Result<PathBuf> {
        let scene = self.scene(image_id).ok_or_else(|| Error::NotFound(format!("scene {image_id:?}")))?;
        let rel = scene.image.as_ref().ok_or_else(|| Error::Data(format!("scene {image_id:?} has no image")))?;
        Ok(self.root.join(rel))
    }
}

/// Writes a complete synthetic dataset to `dir`: one scene per planned trial
/// with the exact stratum and present/absent quotas, PNG images of
/// `size` x `size`, PMSK archives, a sidecar and `dataset.json`.
pub fn synth_dataset(dir: impl AsRef<Path>, size: u32, seed: u64) -> Result<Dataset> {
    let dir = dir.as_ref();
    for sub in ["images", "masks"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenes = Vec::new();
    let mut sidecar = ArchiveSidecar::default();
    // Present-target shapes cycle roughly 4:2:5 rectangle/sphere/cylinder.
    const SHAPE_CYCLE: [TargetShape; 11] = [
        TargetShape::Cylinder,
        TargetShape::Rectangle,
        TargetShape::Cylinder,
        TargetShape::Sphere,
        TargetShape::Rectangle,
        TargetShape::Cylinder,
        TargetShape::Rectangle,
        TargetShape::Cylinder,
        TargetShape::Sphere,
        TargetShape::Rectangle,
        TargetShape::Cylinder,
    ];
    let mut present_counter = 0usize;
    debug_assert_eq!(QUOTAS.iter().map(|q| q.absent).sum::<usize>(), FALSE_TRIALS);

    for quota in QUOTAS {
        let (lo, hi) = match quota.level {
            ClutterLevel::Low => (1, 3),
            ClutterLevel::Intermediate => (5, 8),
            ClutterLevel::High => (9, 11),
        };
        for i in 0..quota.total {
            let present = i >= quota.absent;
            let k: usize = rng.random_range(lo..=hi);
            let n_vocab = SceneSpec::vocabulary_len();
            let offset = rng.random_range(0..n_vocab);
            // Vocabulary order rotated per scene; with a present target the
            // first object has the wanted shape.
            let mut pool: Vec<(&str, ShapeClass)> = (0..n_vocab).map(|j| SceneSpec::vocabulary(j + offset)).collect();
            if present {
                let want: ShapeClass = SHAPE_CYCLE[present_counter % SHAPE_CYCLE.len()].into();
                present_counter += 1;
                let pos = pool.iter().position(|(_, s)| *s == want).expect("vocabulary covers every shape");
                let t = pool.remove(pos);
                pool.insert(0, t);
            }
            let objects: Vec<ObjectSpec> = pool[..k]
                .iter()
                .map(|(label, shape)| ObjectSpec { label: (*label).to_owned(), shape: *shape, size: None, position: None })
                .collect();
            let (target_label, shape) = if present { pool[0] } else { pool[k] };
            let image_id = format!("{}_{i:02}", quota.level.as_str());
            let spec = SceneSpec { image_id: Some(image_id.clone()), width: size, height: size, background_mask: true, objects };
            let (img, archive) = synth_scene(&spec, rng.random())?;
            let image_rel = PathBuf::from("images").join(format!("{image_id}.png"));
            let archive_rel = PathBuf::from("masks").join(format!("{image_id}.pmsk"));
            save_rgb(&img, dir.join(&image_rel))?;
            save_archive(&archive, dir.join(&archive_rel))?;
            sidecar.0.insert(
                image_id.clone(),
                SidecarEntry {
                    source: image_rel.to_string_lossy().into_owned(),
                    targets: present.then(|| target_label.to_owned()).into_iter().collect(),
                },
            );
            scenes.push(SceneEntry {
                image_id,
                image: Some(image_rel),
                archive: Some(archive_rel),
                object_count: k as u32,
                candidates: vec![Candidate {
                    target_label: target_label.to_owned(),
                    target_present: present,
                    shape: shape.try_into()?,
                    ambiguous: false,
                }],
            });
        }
    }
    sidecar.save(dir.join("masks").join("sidecar.json"))?;
    let ds = Dataset { scenes, root: dir.to_path_buf() };
    ds.save(dir.join("dataset.json"))?;
    Ok(ds)
}
