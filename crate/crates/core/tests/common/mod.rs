#![allow(dead_code)]

use std::path::PathBuf;

use phosphene::experiment::{synth_dataset, Condition, Dataset, Phase};
use phosphene::maskstore::{load_archive, MaskArchive};
use phosphene::service::{ClientEvent, SessionConfig, SessionManager};

/// Synthetic dataset in a fresh temporary directory.
pub fn dataset(size: u32, seed: u64) -> (tempfile::TempDir, Dataset, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path(), size, seed).unwrap();
    let manifest = dir.path().join("dataset.json");
    (dir, ds, manifest)
}

/// A pixel of the labelled mask closest to its centroid.
pub fn target_pixel(a: &MaskArchive, label: &str) -> (f64, f64) {
    let m = a.by_label(label).unwrap().bitmap();
    let (cx, cy) = m.centroid().unwrap();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    m.for_each_set(|x, y| {
        let (px, py) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
        let d = (px - cx).powi(2) + (py - cy).powi(2);
        if d < best.0 {
            best = (d, px, py);
        }
    });
    (best.1, best.2)
}

/// Drives a full session through the manager with a fixed script: gaze
/// samples every 20 ms, present targets clicked on (every third trial
/// clicked off-target), absent trials mostly answered absent. Returns the
/// session id.
pub fn scripted_session(m: &SessionManager, manifest: &PathBuf, ds: &Dataset, condition: Condition, seed: u64) -> String {
    let info = m.create(&SessionConfig::new(manifest, condition, seed)).unwrap();
    let id = info.session_id;
    let out = f64::from(info.output_size);
    let mut t = 0u64;
    loop {
        let info = m.info(&id).unwrap();
        match info.phase {
            Phase::Done => break,
            Phase::Break => {
                m.ingest(&id, ClientEvent::Resume).unwrap();
                continue;
            }
            _ => {}
        }
        t += 800;
        m.ingest(&id, ClientEvent::Advance { t: Some(t) }).unwrap();
        let idx = info.index;
        let scene_id = {
            let s = m.get(&id).unwrap();
            let s = s.lock().unwrap();
            s.state().current().unwrap().clone()
        };
        let archive = load_archive(ds.archive_path(&scene_id.image_id).unwrap()).unwrap();
        let scale = out / f64::from(archive.width());
        for k in 0..10u64 {
            let x = (37.0 * (k + idx as u64) as f64) % out;
            m.ingest(&id, ClientEvent::Gaze { t: Some(t + 20 * k), x, y: out - x }).unwrap();
        }
        t += 1000 + 37 * idx as u64;
        let ev = if scene_id.target_present {
            if idx % 3 == 2 {
                // Far corner: a location error unless the target sits there.
                ClientEvent::ClickLeft { t: Some(t), x: 1.0, y: 1.0 }
            } else {
                let (x, y) = target_pixel(&archive, &scene_id.target_label);
                ClientEvent::ClickLeft { t: Some(t), x: x * scale, y: y * scale }
            }
        } else if idx.is_multiple_of(5) {
            ClientEvent::ClickLeft { t: Some(t), x: out / 2.0, y: out / 2.0 }
        } else {
            ClientEvent::ClickRight { t: Some(t) }
        };
        m.ingest(&id, ev).unwrap();
    }
    id
}
