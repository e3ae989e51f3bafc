use phosphene::maskstore::{
    decode_archive, encode_archive, load_archive, save_archive, synth_scene, ArchiveSidecar, Bitmask, MaskArchive,
    MaskEntry, SceneSpec, ShapeClass, SidecarEntry,
};
use phosphene::{Error, FormatError};

fn tiny() -> MaskArchive {
    let mut a = MaskArchive::new("tiny", 10, 2).unwrap();
    let bits = Bitmask::from_fn(10, 2, |x, y| x == 0 || (y == 1 && x == 9));
    a.push(MaskEntry::new(7, Some("cup".into()), ShapeClass::Cylinder, bits)).unwrap();
    a
}

/// Bytes of `tiny()` written out by hand from the documented layout.
fn tiny_bytes() -> Vec<u8> {
    let mut b = b"PMSK".to_vec();
    b.extend([1, 0, 10, 0, 2, 0, 1, 0]);
    b.extend([7, 0, 0, 0, 2, 3, 0]);
    b.extend(b"cup");
    b.extend([3, 0, 0, 0]);
    // Rows of two bytes, MSB first: x = 0 in both rows, x = 9 in row 1.
    b.extend([0x80, 0x00, 0x80, 0x40]);
    b
}

#[test]
fn wire_layout_matches_hand_encoding() {
    assert_eq!(encode_archive(&tiny()).unwrap(), tiny_bytes());
    assert_eq!(decode_archive(&tiny_bytes(), "tiny").unwrap(), tiny());
}

#[test]
fn file_round_trip_takes_id_from_stem() {
    let dir = tempfile::tempdir().unwrap();
    let (_, archive) = synth_scene(&SceneSpec::random(120, 90, 6, true), 8).unwrap();
    let path = dir.path().join("kitchen_04.pmsk");
    save_archive(&archive, &path).unwrap();
    let back = load_archive(&path).unwrap();
    assert_eq!(back.image_id, "kitchen_04");
    assert_eq!((back.width(), back.height()), (120, 90));
    assert_eq!(back.masks(), archive.masks());
    assert!(back.by_label("background").is_some());
}

#[test]
fn corrupted_files_are_rejected() {
    let good = tiny_bytes();
    let fmt = |bytes: &[u8]| decode_archive(bytes, "x").unwrap_err();
    assert_eq!(fmt(&good[..6]), FormatError::TruncatedHeader);
    assert_eq!(fmt(&good[..good.len() - 1]), FormatError::Truncated { mask_id: 7 });
    assert_eq!(fmt(&[&good[..], &[0]].concat()), FormatError::TrailingBytes(1));
    let mut b = good.clone();
    b[0] = b'X';
    assert!(matches!(fmt(&b), FormatError::BadMagic { .. }));
    let mut b = good.clone();
    b[4] = 2;
    assert_eq!(fmt(&b), FormatError::UnsupportedVersion(2));
    let mut b = good.clone();
    *b.last_mut().unwrap() = 0x60;
    assert_eq!(fmt(&b), FormatError::Padding { mask_id: 7 });
    let mut b = good.clone();
    b[22] = 4;
    assert_eq!(fmt(&b), FormatError::BitCountMismatch { mask_id: 7, stored: 4, counted: 3 });
    let mut b = good;
    b[16] = 9;
    assert_eq!(fmt(&b), FormatError::ShapeClass { mask_id: 7, code: 9 });

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pmsk");
    std::fs::write(&path, b"PMSK").unwrap();
    assert!(matches!(load_archive(&path), Err(Error::Format(FormatError::TruncatedHeader))));
    assert!(matches!(load_archive(dir.path().join("none.pmsk")), Err(Error::Io { .. })));
}

#[test]
fn sidecar_json_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = ArchiveSidecar::default();
    s.0.insert("scene_1".into(), SidecarEntry { source: "images/scene_1.png".into(), targets: vec!["mug".into()] });
    let path = dir.path().join("sidecar.json");
    s.save(&path).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(raw, serde_json::json!({"scene_1": {"source": "images/scene_1.png", "targets": ["mug"]}}));
    assert_eq!(ArchiveSidecar::load(&path).unwrap(), s);
}
