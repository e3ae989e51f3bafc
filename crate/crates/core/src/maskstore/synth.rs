//! Desk-scale synthetic scenes with exact ground-truth masks, used as test
//! fixtures and as a stand-in dataset when no segmentation model is at hand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Bitmask, MaskArchive, MaskEntry, ShapeClass};
use crate::error::{Error, Result};
use crate::imaging::RgbImage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub label: String,
    pub shape: ShapeClass,
    /// Bounding-box size; drawn from the seed when absent.
    pub size: Option<(u32, u32)>,
    /// Bounding-box top-left corner; drawn from the seed when absent.
    pub position: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub image_id: Option<String>,
    pub width: u32,
    pub height: u32,
    /// Adds a "background" mask covering every pixel no object owns.
    pub background_mask: bool,
    pub objects: Vec<ObjectSpec>,
}

const VOCABULARY: [(&str, ShapeClass); 15] = [
    ("cereal box", ShapeClass::Rectangle),
    ("keyboard", ShapeClass::Rectangle),
    ("book", ShapeClass::Rectangle),
    ("food box", ShapeClass::Rectangle),
    ("tissue box", ShapeClass::Rectangle),
    ("orange", ShapeClass::Sphere),
    ("ball", ShapeClass::Sphere),
    ("apple", ShapeClass::Sphere),
    ("onion", ShapeClass::Sphere),
    ("can", ShapeClass::Cylinder),
    ("bottle", ShapeClass::Cylinder),
    ("marker", ShapeClass::Cylinder),
    ("flashlight", ShapeClass::Cylinder),
    ("mug", ShapeClass::Cylinder),
    ("glue stick", ShapeClass::Cylinder),
];

impl SceneSpec {
    /// `k` objects with vocabulary labels cycling through the three target
    /// shapes; sizes and positions come from the seed at synthesis time.
    pub fn random(width: u32, height: u32, k: usize, background_mask: bool) -> Self {
        let objects = (0..k)
            .map(|i| {
                let (label, shape) = VOCABULARY[(i * 7) % VOCABULARY.len()];
                let label = if i < VOCABULARY.len() { label.to_owned() } else { format!("{label} {i}") };
                ObjectSpec { label, shape, size: None, position: None }
            })
            .collect();
        Self { image_id: None, width, height, background_mask, objects }
    }

    /// Vocabulary label and shape for index `i`.
    pub fn vocabulary(i: usize) -> (&'static str, ShapeClass) {
        VOCABULARY[i % VOCABULARY.len()]
    }

    pub fn vocabulary_len() -> usize {
        VOCABULARY.len()
    }
}

struct Placed {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
}

impl Placed {
    fn overlaps(&self, o: &Placed, margin: u32) -> bool {
        self.x < o.x + o.w + margin && o.x < self.x + self.w + margin && self.y < o.y + o.h + margin
            && o.y < self.y + self.h + margin
    }

    fn contains(&self, shape: ShapeClass, px: u32, py: u32) -> bool {
        if px < self.x || py < self.y || px >= self.x + self.w || py >= self.y + self.h {
            return false;
        }
        let fx = f64::from(px - self.x) + 0.5;
        let fy = f64::from(py - self.y) + 0.5;
        let (w, h) = (f64::from(self.w), f64::from(self.h));
        match shape {
            ShapeClass::Rectangle | ShapeClass::Other => true,
            ShapeClass::Sphere => {
                let dx = (fx - w / 2.0) / (w / 2.0);
                let dy = (fy - h / 2.0) / (h / 2.0);
                dx * dx + dy * dy <= 1.0
            }
            ShapeClass::Cylinder => {
                // Capsule along the longer axis.
                let (along, across, len, thick) = if w >= h { (fx, fy, w, h) } else { (fy, fx, h, w) };
                let r = thick / 2.0;
                let a = along.clamp(r, len - r);
                let (dx, dy) = (along - a, across - r);
                dx * dx + dy * dy <= r * r
            }
        }
    }
}

fn random_color(rng: &mut ChaCha8Rng, avoid: [u8; 3]) -> [u8; 3] {
    loop {
        let c = [rng.random(), rng.random(), rng.random()];
        let dist: i32 = c.iter().zip(avoid).map(|(&a, b)| (i32::from(a) - i32::from(b)).abs()).sum();
        if dist > 120 {
            return c;
        }
    }
}

/// Renders the scene and returns it with one mask per object (visible
/// pixels only; later objects occlude earlier ones).
pub fn synth_scene(spec: &SceneSpec, seed: u64) -> Result<(RgbImage, MaskArchive)> {
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gray = rng.random_range(40..=110u8);
    let background = [gray, gray, gray.saturating_add(8)];
    let mut image = RgbImage::filled(w, h, background)?;
    let image_id = spec.image_id.clone().unwrap_or_else(|| format!("synth_{seed}"));
    let mut archive = MaskArchive::new(image_id, w, h)?;

    let mut placed: Vec<Placed> = Vec::with_capacity(spec.objects.len());
    for obj in &spec.objects {
        let (ow, oh) = match obj.size {
            Some(s) => s,
            None => {
                let lo = (w.min(h) / 10).max(2);
                let hi = (w.min(h) / 4).max(lo + 1);
                let base = rng.random_range(lo..hi);
                match obj.shape {
                    ShapeClass::Sphere => (base, base),
                    ShapeClass::Cylinder => (base, (base / 3).max(2)),
                    _ => (base, (base * 2 / 3).max(2)),
                }
            }
        };
        if ow < 2 || oh < 2 || ow > w || oh > h {
            return Err(Error::invalid(format!(
                "object {:?} of size {ow}x{oh} cannot be placed in a {w}x{h} frame",
                obj.label
            )));
        }
        let p = match obj.position {
            Some((x, y)) => {
                if x + ow > w || y + oh > h {
                    return Err(Error::invalid(format!("object {:?} at ({x}, {y}) leaves the frame", obj.label)));
                }
                Placed { x, y, w: ow, h: oh }
            }
            None => {
                let mut candidate = Placed { x: 0, y: 0, w: ow, h: oh };
                for _ in 0..200 {
                    candidate.x = rng.random_range(0..=w - ow);
                    candidate.y = rng.random_range(0..=h - oh);
                    if placed.iter().all(|q| !candidate.overlaps(q, 2)) {
                        break;
                    }
                }
                candidate
            }
        };
        placed.push(p);
    }

    let mut owner: Vec<Option<usize>> = vec![None; w as usize * h as usize];
    for (i, (p, obj)) in placed.iter().zip(&spec.objects).enumerate() {
        let color = random_color(&mut rng, background);
        for y in p.y..p.y + p.h {
            for x in p.x..p.x + p.w {
                if p.contains(obj.shape, x, y) {
                    owner[y as usize * w as usize + x as usize] = Some(i);
                    image.set(x, y, color);
                }
            }
        }
    }

    if spec.background_mask && !spec.objects.is_empty() {
        let bm = Bitmask::from_fn(w, h, |x, y| owner[y as usize * w as usize + x as usize].is_none());
        archive.push(MaskEntry::new(0, Some("background".into()), ShapeClass::Other, bm))?;
    }
    for (i, obj) in spec.objects.iter().enumerate() {
        let bm = Bitmask::from_fn(w, h, |x, y| owner[y as usize * w as usize + x as usize] == Some(i));
        archive.push(MaskEntry::new(i as u32 + 1, Some(obj.label.clone()), obj.shape, bm))?;
    }
    Ok((image, archive))
}
