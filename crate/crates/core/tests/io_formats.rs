use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use segerr::bsa::{FeatureMatrix, Mlp};
use segerr::io::{
    decode_weights, encode_scene, encode_weights, parse_scene, read_groups, read_json,
    read_report, read_scene, read_weights, write_json, write_report, write_scene,
    write_weights, PlyFormat,
};
use segerr::{
    evaluate_scene, generate_scene, validate_scene, ClassGroups, Error, EvalConfig, SceneSpec,
};

#[test]
fn binary_scene_is_bitwise_stable() {
    let mut spec = SceneSpec::random_blobs(3000, 0.5, 11);
    spec.jitter = 0.001;
    let (cloud, labels) = generate_scene(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.ply");
    write_scene(&p, &cloud, &labels, PlyFormat::BinaryLittleEndian).unwrap();
    let (c2, l2) = read_scene(&p).unwrap();
    assert_eq!(c2, cloud);
    assert_eq!(l2, labels);
    let again = encode_scene(&c2, &l2, PlyFormat::BinaryLittleEndian).unwrap();
    assert_eq!(again, fs::read(&p).unwrap());
}

#[test]
fn ascii_scene_round_trip() {
    let (cloud, labels) = generate_scene(&SceneSpec::two_spheres()).unwrap();
    let bytes = encode_scene(&cloud, &labels, PlyFormat::Ascii).unwrap();
    let (c2, l2) = parse_scene(&bytes).unwrap();
    assert_eq!(c2, cloud);
    assert_eq!(l2, labels);
}

#[test]
fn foreign_header_is_accepted() {
    let text = "ply\nformat ascii 1.0\ncomment exported elsewhere\nobj_info x\n\
element vertex 2\nproperty float32 x\nproperty float32 y\nproperty float32 z\n\
property uint8 red\nproperty uint8 green\nproperty uint8 blue\nproperty int32 label\n\
element face 1\nproperty list uchar int vertex_indices\nend_header\n\
0 0 0 10 20 30 2\n1 1 1 40 50 60 -1\n3 0 1 1\n";
    let (cloud, labels) = parse_scene(text.as_bytes()).unwrap();
    assert_eq!(cloud.colors().unwrap(), &[[10, 20, 30], [40, 50, 60]]);
    assert_eq!(labels.labels(), &[2, -1]);
}

#[test]
fn malformed_scenes() {
    let cases: [(&str, &str); 5] = [
        ("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n", "label"),
        ("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty int label\nend_header\n", "truncated"),
        ("ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty float y\nproperty float z\nproperty int label\nend_header\n0 0 0 0\n", "\"x\""),
        ("ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n", "big_endian"),
        ("PLY\n", "magic"),
    ];
    for (text, needle) in cases {
        match parse_scene(text.as_bytes()) {
            Err(e @ Error::Ply { .. }) => assert!(e.to_string().contains(needle), "{e} lacks {needle}"),
            other => panic!("expected a PLY error for {needle}, got {other:?}"),
        }
    }
}

#[test]
fn non_finite_coordinates_rejected() {
    let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty int label\nend_header\nnan 0 0 1\n";
    assert!(matches!(
        parse_scene(text.as_bytes()),
        Err(Error::NonFiniteCoordinate { index: 0 })
    ));
}

#[test]
fn groups_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    fs::write(&p, r#"{"head": [0, 1], "tail": [2]}"#).unwrap();
    let g = read_groups(&p).unwrap();
    let expect = ClassGroups::new(BTreeMap::from([
        ("head".to_string(), BTreeSet::from([0, 1])),
        ("tail".to_string(), BTreeSet::from([2])),
    ]))
    .unwrap();
    assert_eq!(g, expect);
    let q = dir.path().join("g2.json");
    write_json(&q, &g).unwrap();
    assert_eq!(read_groups(&q).unwrap(), g);
    fs::write(&p, r#"{"a": [0], "b": [0]}"#).unwrap();
    assert!(matches!(read_groups(&p), Err(Error::Json { .. })));
    assert!(read_groups(&p).unwrap_err().to_string().contains("overlap"));
}

#[test]
fn scene_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("spec.json");
    let spec = SceneSpec::two_spheres();
    write_json(&p, &spec).unwrap();
    let back: SceneSpec = read_json(&p).unwrap();
    assert_eq!(back, spec);
}

#[test]
fn report_file_round_trip_and_rejections() {
    let (cloud, gt) = generate_scene(&SceneSpec::checkerboard()).unwrap();
    let pred = segerr::corrupt_labels(&gt, &cloud, segerr::CorruptionMode::Dilate, 0.03, 2).unwrap();
    let cfg = EvalConfig::new(2);
    let groups = ClassGroups::new(BTreeMap::from([("all".to_string(), BTreeSet::from([0, 1]))])).unwrap();
    let rep = evaluate_scene(&validate_scene(&cloud, &gt, &pred, &cfg).unwrap(), &groups).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    write_report(&p, &rep).unwrap();
    let back = read_report(&p).unwrap();
    assert_eq!(back.counters, rep.counters);
    let fresh = back.recompute();
    for (a, b) in back.metrics.present_values().iter().zip(fresh.present_values()) {
        assert!((a - b).abs() <= 1e-12);
    }

    let text = fs::read_to_string(&p).unwrap();
    let unknown = text.replacen("\"scenes\"", "\"comment\": \"x\",\n  \"scenes\"", 1);
    fs::write(&p, unknown).unwrap();
    assert!(read_report(&p).is_err());
    let inconsistent = text.replacen("\"boundary_overlap\": ", "\"boundary_overlap\": 99999", 1);
    fs::write(&p, inconsistent).unwrap();
    assert!(read_report(&p).is_err());
}

#[test]
fn weight_files() {
    let mats = vec![
        FeatureMatrix::new(2, 3, vec![0.5, -1.0, 2.0, 1e-300, f64::MAX, -0.0]).unwrap(),
        FeatureMatrix::new(1, 3, vec![0.1, 0.2, 0.3]).unwrap(),
        FeatureMatrix::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap(),
        FeatureMatrix::new(1, 1, vec![-4.0]).unwrap(),
    ];
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("w.bin");
    write_weights(&p, &mats).unwrap();
    let back = read_weights(&p).unwrap();
    assert_eq!(encode_weights(&back), fs::read(&p).unwrap());
    let mlp = Mlp::from_matrices(back).unwrap();
    assert_eq!((mlp.in_dim(), mlp.out_dim()), (2, 1));
    let bytes = fs::read(&p).unwrap();
    assert!(matches!(decode_weights(&bytes[..bytes.len() - 1]), Err(Error::Weights { .. })));
}
