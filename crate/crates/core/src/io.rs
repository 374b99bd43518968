//! File formats.
//!
//! * Shape: JSON object `{"name": "...", "rings": [[[x, y], ...], ...]}`, one
//!   shape per file, rings implicitly closed.
//! * Matrix: CSV, header `label,<label_1>,...,<label_N>`, then one row per
//!   object starting with its label; entries with 4 fractional digits.
//! * Embedding: CSV `label,x1,...,xn`, 10 fractional digits.
//! * Assignment: CSV `label,cluster,is_centroid` (cluster is 0-based,
//!   is_centroid is 0 or 1).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::ClusterAssignment;
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::score::DissimilarityMatrix;

pub const MATRIX_DECIMALS: usize = 4;
pub const COORD_DECIMALS: usize = 10;

#[derive(Debug, Serialize, Deserialize)]
struct ShapeFile {
    name: String,
    rings: Vec<Vec<[f64; 2]>>,
}

/// Parses one shape; `location` names the source in error messages.
pub fn parse_shape_json(text: &str, location: &str) -> Result<Shape> {
    let file: ShapeFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("{location}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    Shape::from_coords(file.name, &file.rings)
}

pub fn read_shape_file(path: &Path) -> Result<Shape> {
    let text = fs::read_to_string(path)?;
    parse_shape_json(&text, &path.display().to_string())
}

pub fn shape_to_json(shape: &Shape) -> String {
    let file = ShapeFile { name: shape.name().to_string(), rings: shape.to_coords() };
    serde_json::to_string_pretty(&file).expect("shape serializes")
}

fn csv_err(location: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::Parse { location: format!("{location}:{line}"), message: e.to_string() }
    }
}

fn parse_number(s: &str, location: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        location: format!("{location}:{line}"),
        message: format!("`{s}`: {e}"),
    })
}

fn fmt(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Avoid "-0.0000" so re-written files are byte-stable.
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn write_matrix_csv(m: &DissimilarityMatrix, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = csv_err("matrix output");
    let mut header = vec!["label".to_string()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header).map_err(&map)?;
    for (i, label) in m.labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..m.len()).map(|j| fmt(m.get(i, j), MATRIX_DECIMALS)));
        w.write_record(&row).map_err(&map)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(input: impl Read, location: &str) -> Result<DissimilarityMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let map = csv_err(location);
    let header = r.headers().map_err(&map)?.clone();
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(&map)?;
        let line = k + 2;
        if rec.len() != n + 1 {
            return Err(Error::Parse {
                location: format!("{location}:{line}"),
                message: format!("expected {} fields, found {}", n + 1, rec.len()),
            });
        }
        if rows >= n || rec[0] != labels[rows] {
            return Err(Error::Parse {
                location: format!("{location}:{line}"),
                message: format!("row label `{}` does not match the header order", &rec[0]),
            });
        }
        for v in rec.iter().skip(1) {
            values.push(parse_number(v, location, line)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            location: location.to_string(),
            message: format!("{n} labels in the header but {rows} rows"),
        });
    }
    DissimilarityMatrix::new(labels, DMatrix::from_row_slice(n, n, &values))
}

pub fn read_matrix_file(path: &Path) -> Result<DissimilarityMatrix> {
    read_matrix_csv(fs::File::open(path)?, &path.display().to_string())
}

pub fn write_embedding_csv(labels: &[String], coords: &DMatrix<f64>, out: impl Write) -> Result<()> {
    if labels.len() != coords.nrows() {
        return Err(Error::Dimension(format!("{} labels for {} points", labels.len(), coords.nrows())));
    }
    let mut w = csv::Writer::from_writer(out);
    let map = csv_err("embedding output");
    let mut header = vec!["label".to_string()];
    header.extend((1..=coords.ncols()).map(|a| format!("x{a}")));
    w.write_record(&header).map_err(&map)?;
    for (i, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(coords.row(i).iter().map(|&v| fmt(v, COORD_DECIMALS)));
        w.write_record(&row).map_err(&map)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `label,x1,...,xn` rows.
pub fn read_embedding_csv(input: impl Read, location: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let map = csv_err(location);
    let dim = r.headers().map_err(&map)?.len().saturating_sub(1);
    if dim == 0 {
        return Err(Error::Parse { location: location.to_string(), message: "no coordinate columns".into() });
    }
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(&map)?;
        labels.push(rec[0].to_string());
        for v in rec.iter().skip(1) {
            values.push(parse_number(v, location, k + 2)?);
        }
    }
    Ok((labels.clone(), DMatrix::from_row_slice(labels.len(), dim, &values)))
}

pub fn read_embedding_file(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    read_embedding_csv(fs::File::open(path)?, &path.display().to_string())
}

pub fn write_assignment_csv(labels: &[String], a: &ClusterAssignment, out: impl Write) -> Result<()> {
    if labels.len() != a.labels.len() {
        return Err(Error::Dimension(format!("{} labels for {} objects", labels.len(), a.labels.len())));
    }
    let mut w = csv::Writer::from_writer(out);
    let map = csv_err("assignment output");
    w.write_record(["label", "cluster", "is_centroid"]).map_err(&map)?;
    for (i, label) in labels.iter().enumerate() {
        let c = a.labels[i].to_string();
        let centroid = if a.is_centroid(i) { "1" } else { "0" };
        w.write_record([label.as_str(), c.as_str(), centroid]).map_err(&map)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an assignment; the cluster count is taken as the largest label + 1
/// and the objective is not stored in the file (reported as NaN).
pub fn read_assignment_csv(input: impl Read, location: &str) -> Result<(Vec<String>, ClusterAssignment)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let map = csv_err(location);
    let mut names = Vec::new();
    let mut labels = Vec::new();
    let mut centroids = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(&map)?;
        let line = k + 2;
        let bad = |m: String| Error::Parse { location: format!("{location}:{line}"), message: m };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        names.push(rec[0].to_string());
        let c: usize = rec[1].trim().parse().map_err(|e| bad(format!("cluster `{}`: {e}", &rec[1])))?;
        labels.push(c);
        match rec[2].trim() {
            "1" => centroids.push((c, names.len() - 1)),
            "0" => {}
            other => return Err(bad(format!("is_centroid must be 0 or 1, found `{other}`"))),
        }
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut centroid_index = vec![None; k];
    for (c, i) in centroids {
        centroid_index[c] = Some(i);
    }
    Ok((names, ClusterAssignment { k, labels, centroid_index, objective: f64::NAN }))
}

pub fn read_assignment_file(path: &Path) -> Result<(Vec<String>, ClusterAssignment)> {
    read_assignment_csv(fs::File::open(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_json_two_rings() {
        let text = r#"{"name": "holed", "rings": [
            [[0, 0], [4, 0], [4, 4], [0, 4]],
            [[1, 1], [3, 1], [3, 3], [1, 3]]
        ]}"#;
        let s = parse_shape_json(text, "mem").unwrap();
        assert_eq!(s.name(), "holed");
        assert_eq!(s.rings().len(), 2);
        let back = parse_shape_json(&shape_to_json(&s), "mem").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn shape_json_errors() {
        let err = parse_shape_json("{\"name\": \"x\",\n \"rings\": [[[0, 0], [1, 0]]]}", "f.json").unwrap_err();
        assert!(matches!(err, Error::InvalidRing(_)));
        let err = parse_shape_json("{\"name\": \"x\",\n \"rings\": [[[0, 0], [1, 0]],]}", "f.json").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("f.json:2:"), "{location}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = DissimilarityMatrix::new(
            vec!["a".into(), "b, c".into()],
            DMatrix::from_row_slice(2, 2, &[0.0, 12.34567, 12.34567, 0.0]),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "label,a,\"b, c\"\na,0.0000,12.3457\n\"b, c\",12.3457,0.0000\n");
        let back = read_matrix_csv(&buf[..], "mem").unwrap();
        assert_eq!(back.labels, m.labels);
        assert_eq!(back.get(0, 1), 12.3457);
        let mut again = Vec::new();
        write_matrix_csv(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn matrix_csv_rejects_mismatched_rows() {
        let text = "label,a,b\nb,0,1\na,1,0\n";
        assert!(matches!(read_matrix_csv(text.as_bytes(), "m.csv"), Err(Error::Parse { .. })));
        let text = "label,a,b\na,0,x\nb,1,0\n";
        assert!(matches!(read_matrix_csv(text.as_bytes(), "m.csv"), Err(Error::Parse { .. })));
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(fmt(-0.00001, 4), "0.0000");
        assert_eq!(fmt(-1.5, 1), "-1.5");
    }

    #[test]
    fn assignment_round_trip() {
        let a = ClusterAssignment { k: 2, labels: vec![1, 0, 1], centroid_index: vec![Some(1), Some(2)], objective: 3.0 };
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        write_assignment_csv(&names, &a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "label,cluster,is_centroid\nx,1,0\ny,0,1\nz,1,1\n");
        let (n2, b) = read_assignment_csv(&buf[..], "mem").unwrap();
        assert_eq!(n2, names);
        assert_eq!((b.k, b.labels, b.centroid_index), (a.k, a.labels, a.centroid_index));
    }
}
