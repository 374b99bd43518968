mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use common::*;
use nalgebra::DMatrix;
use shapesim::io;
use shapesim_cli::{load_shapes, run, RunConfig};

fn exec(args: &[&str]) -> anyhow::Result<String> {
    let cfg = RunConfig::try_parse_from(std::iter::once("shapesim").chain(args.iter().copied()))?;
    let mut out = Vec::new();
    run(&cfg, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_shape(dir: &Path, file: &str, json: &str) -> PathBuf {
    let path = dir.join(file);
    fs::write(&path, json).unwrap();
    path
}

#[test]
fn loads_two_ring_shape() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_shape(
        dir.path(),
        "a.json",
        r#"{"name": "a", "rings": [[[0,0],[1,0],[1,1],[0,1]], [[3,0],[4,0],[4,1]]]}"#,
    );
    let shapes = load_shapes(&[f]).unwrap();
    assert_eq!(shapes[0].rings().len(), 2);
}

#[test]
fn rejects_two_vertex_ring_and_duplicate_names() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_shape(dir.path(), "bad.json", r#"{"name": "bad", "rings": [[[0,0],[1,0]]]}"#);
    let err = load_shapes(&[bad]).unwrap_err();
    assert!(format!("{err:#}").contains("bad.json"));
    let a = write_shape(dir.path(), "a.json", r#"{"name": "same", "rings": [[[0,0],[1,0],[0,1]]]}"#);
    let b = write_shape(dir.path(), "b.json", r#"{"name": "same", "rings": [[[0,0],[2,0],[0,2]]]}"#);
    assert!(format!("{:#}", load_shapes(&[a, b]).unwrap_err()).contains("duplicate"));
}

#[test]
fn parse_errors_carry_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_shape(dir.path(), "broken.json", "{\"name\": \"x\",\n \"rings\": [[[0,0],[1,0]],]}");
    let msg = format!("{:#}", load_shapes(&[f]).unwrap_err());
    assert!(msg.contains("broken.json:2:"), "{msg}");
}

#[test]
fn matrix_of_three_shapes_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = dir.path().join("shapes");
    fs::create_dir(&shapes).unwrap();
    let mut r = rng(1);
    for i in 0..3 {
        fs::write(shapes.join(format!("s{i}.json")), io::shape_to_json(&random_shape(&mut r, &format!("s{i}")))).unwrap();
    }
    fs::write(shapes.join("notes.txt"), "ignored").unwrap();
    let out = dir.path().join("D.csv");
    exec(&["matrix", p(&shapes), "--out", p(&out)]).unwrap();
    let m = io::read_matrix_file(&out).unwrap();
    assert_eq!(m.labels, ["s0", "s1", "s2"]);
    m.check_symmetric_zero_diagonal().unwrap();
}

#[test]
fn gmds_recovers_euclidean_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(2);
    let d = euclidean(&random_points(&mut r, 10, 2).map(|v| 100.0 * v));
    let csv = dir.path().join("D.csv");
    // The CSV keeps 4 decimals, so recovery is exact up to that rounding.
    write_matrix(&csv, &labels("p", 10), &d);
    let out = exec(&["--out-dir", p(dir.path()), "gmds", p(&csv), "--dim", "2"]).unwrap();
    let rr: f64 = out.lines().find_map(|l| l.strip_prefix("residual_ratio_percent: ")).unwrap().parse().unwrap();
    assert!(rr < 0.01, "{out}");
    assert!(fs::read_to_string(dir.path().join("quality.txt")).unwrap().contains("method: gmds"));
    let (names, coords) = io::read_embedding_file(&dir.path().join("embedding.csv")).unwrap();
    assert_eq!((names.len(), coords.ncols()), (10, 2));
}

#[test]
fn block_cluster_finds_blobs() {
    let dir = tempfile::tempdir().unwrap();
    let pts = DMatrix::from_fn(8, 2, |i, a| if i < 4 { 0.1 * (i + a) as f64 } else { 20.0 + 0.1 * (i * a) as f64 });
    let csv = dir.path().join("D.csv");
    write_matrix(&csv, &labels("b", 8), &euclidean(&pts));
    exec(&["--out-dir", p(dir.path()), "block-cluster", p(&csv), "--k", "2"]).unwrap();
    let (_, a) = io::read_assignment_file(&dir.path().join("assignment.csv")).unwrap();
    assert!(a.labels[..4].iter().all(|&c| c == a.labels[0]));
    assert!(a.labels[4..].iter().all(|&c| c == a.labels[4]));
    assert_ne!(a.labels[0], a.labels[4]);
    assert_eq!(a.centroid_index.iter().flatten().count(), 2);
}

#[test]
fn embeddings_kmeans_project_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(3);
    let pts = random_points(&mut r, 9, 3).map(|v| 10.0 * v);
    let csv = dir.path().join("D.csv");
    write_matrix(&csv, &labels("q", 9), &euclidean(&pts));
    let o = |name: &str| dir.path().join(name);

    exec(&["--out-dir", p(dir.path()), "torgerson", p(&csv), "--dim", "3", "--out", p(&o("t.csv"))]).unwrap();
    // Rounded CSV entries leave tiny extra eigenvalues, so only the requested
    // dimension is fixed.
    let q = fs::read_to_string(o("quality.txt")).unwrap();
    assert!(q.contains("method: torgerson") && q.contains("dimension: 3") && q.contains("usable_terms"));
    exec(&["--out-dir", p(dir.path()), "correlate", p(&csv), "--dim", "2", "--starts", "2", "--out", p(&o("c.csv"))]).unwrap();
    assert!(fs::read_to_string(o("quality.txt")).unwrap().contains("rescale_factor"));
    exec(&["--out-dir", p(dir.path()), "project", p(&o("t.csv")), "--dim", "2", "--out", p(&o("t2.csv"))]).unwrap();
    exec(&["--out-dir", p(dir.path()), "kmeans", p(&o("t2.csv")), "--k", "3", "--out", p(&o("k.csv"))]).unwrap();

    // Anchors: the original planar coordinates of a few objects.
    fs::write(o("anchors.csv"), "label,x,y\nq0,0,0\nq1,10,0\nq2,0,10\n").unwrap();
    let text = exec(&[
        "--out-dir",
        p(dir.path()),
        "report",
        p(&csv),
        p(&o("t2.csv")),
        "--assignment",
        p(&o("k.csv")),
        "--anchors",
        p(&o("anchors.csv")),
        "--allow-reflection",
    ])
    .unwrap();
    assert!(text.contains("anchor_fit_rms"));
    for svg in ["map.svg", "rank.svg"] {
        let body = fs::read_to_string(o(svg)).unwrap();
        roxmltree::Document::parse(&body).unwrap();
    }
    assert!(!o("scatter.svg").exists());
    let map = fs::read_to_string(o("map.svg")).unwrap();
    assert_eq!(map.matches("class=\"centroid\"").count(), 3);

    // A 3D embedding has no map, and asking for clusters on it is an error.
    exec(&["--out-dir", p(dir.path()), "report", p(&csv), p(&o("t.csv"))]).unwrap();
    assert!(exec(&["--out-dir", p(dir.path()), "report", p(&csv), p(&o("t.csv")), "--assignment", p(&o("k.csv"))]).is_err());
}

#[test]
fn triangles_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut d = DMatrix::from_row_slice(4, 4, &[0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    d[(0, 1)] = 5.0;
    d[(1, 0)] = 5.0;
    let csv = dir.path().join("D.csv");
    write_matrix(&csv, &labels("t", 4), &d);
    let out = exec(&["triangles", p(&csv)]).unwrap();
    assert!(out.contains("violating_triples: 2 of 4"), "{out}");
    assert!(out.contains("violating_pairs: 1 of 6"), "{out}");
}

#[test]
fn binary_exits_nonzero_with_diagnostic() {
    let out = Process::new(env!("CARGO_BIN_EXE_shapesim")).args(["triangles", "/nonexistent/D.csv"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/D.csv"));
    let out = Process::new(env!("CARGO_BIN_EXE_shapesim")).args(["gmds"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn score_command_prints_score() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, io::shape_to_json(&square("a", 0.0, 0.0, 1.0))).unwrap();
    fs::write(&b, io::shape_to_json(&square("b", 0.5, 0.0, 2.0))).unwrap();
    let out = exec(&["score", p(&a), p(&b), "--starts", "4", "--seed", "3"]).unwrap();
    let s: f64 = out.lines().find_map(|l| l.strip_prefix("score: ")).unwrap().parse().unwrap();
    assert!(s < 0.5, "{out}");
}
