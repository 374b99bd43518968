//! Minimal SVG figures: embedding maps and data-versus-fit plots.
//!
//! Output is a pure function of the input (fixed precision, no timestamps),
//! so figures are byte-identical across runs.

use std::fmt::Write;

use nalgebra::DMatrix;
use shapesim::analysis::ClusterAssignment;
use shapesim::{Error, Result};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;
const BLUE: &str = "#1f5fbf";
const RED: &str = "#d62728";

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Affine map from data range onto `[lo, hi]` pixels; a zero range maps to the middle.
fn axis(min: f64, max: f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let span = max - min;
    move |v| if span > 0.0 { lo + (v - min) / span * (hi - lo) } else { 0.5 * (lo + hi) }
}

/// Labeled scatter of a 2D embedding, y pointing up, equal aspect ratio.
/// With an assignment, points are filled per cluster and centroids ringed.
pub fn render_map_svg(labels: &[String], coords: &DMatrix<f64>, assignment: Option<&ClusterAssignment>) -> Result<String> {
    if coords.ncols() != 2 {
        return Err(Error::Dimension(format!("map needs a 2D embedding, got {} columns", coords.ncols())));
    }
    let n = coords.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("empty embedding".into()));
    }
    if labels.len() != n || assignment.is_some_and(|a| a.labels.len() != n) {
        return Err(Error::Dimension("labels, coordinates and assignment disagree in length".into()));
    }
    let (xs, ys) = (coords.column(0), coords.column(1));
    let span = (xs.max() - xs.min()).max(ys.max() - ys.min());
    let (cx, cy) = (0.5 * (xs.max() + xs.min()), 0.5 * (ys.max() + ys.min()));
    let px = axis(cx - 0.5 * span, cx + 0.5 * span, MARGIN, SIZE - MARGIN);
    let py = axis(cy - 0.5 * span, cy + 0.5 * span, SIZE - MARGIN, MARGIN);

    let mut out = header(SIZE, SIZE);
    for i in 0..n {
        let (x, y) = (px(xs[i]), py(ys[i]));
        let fill = assignment.map_or("#444444", |a| PALETTE[a.labels[i] % PALETTE.len()]);
        if assignment.is_some_and(|a| a.is_centroid(i)) {
            let _ = writeln!(out, "<circle class=\"centroid\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"10\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>");
        }
        let _ = writeln!(out, "<circle class=\"point\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"{fill}\"/>");
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            x + 7.0,
            y - 7.0,
            escape(&labels[i])
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn upper_pairs(data: &DMatrix<f64>, fitted: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    if data.shape() != fitted.shape() || data.nrows() != data.ncols() {
        return Err(Error::Dimension(format!(
            "need equal square matrices, got {:?} and {:?}",
            data.shape(),
            fitted.shape()
        )));
    }
    let n = data.nrows();
    let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (data[(i, j)], fitted[(i, j)])).collect();
    if pairs.is_empty() {
        return Err(Error::InvalidInput("matrices have no off-diagonal entries".into()));
    }
    Ok(pairs)
}

fn polyline(points: impl Iterator<Item = (f64, f64)>, color: &str, class: &str) -> String {
    let pts: Vec<String> = points.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    format!("<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n", pts.join(" "))
}

fn frame(out: &mut String, x_label: &str, y_label: &str) {
    let (lo, hi) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(out, "<rect x=\"{lo}\" y=\"{lo}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999999\"/>", hi - lo, hi - lo);
    let _ = writeln!(out, "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>", SIZE / 2.0, SIZE - 15.0);
    let _ = writeln!(
        out,
        "<text x=\"15\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.0})\">{y_label}</text>",
        SIZE / 2.0,
        SIZE / 2.0
    );
}

/// Upper-triangle entries sorted by the data value: data (blue) and the
/// matching fitted distances (red) against rank.
pub fn render_rank_plot_svg(data: &DMatrix<f64>, fitted: &DMatrix<f64>) -> Result<String> {
    let mut pairs = upper_pairs(data, fitted)?;
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let top = pairs.iter().fold(0.0f64, |m, p| m.max(p.0).max(p.1));
    let px = axis(0.0, (pairs.len() - 1) as f64, MARGIN, SIZE - MARGIN);
    let py = axis(0.0, top, SIZE - MARGIN, MARGIN);
    let mut out = header(SIZE, SIZE);
    frame(&mut out, "rank of matrix entry", "value");
    out += &polyline(pairs.iter().enumerate().map(|(k, p)| (px(k as f64), py(p.0))), BLUE, "data");
    out += &polyline(pairs.iter().enumerate().map(|(k, p)| (px(k as f64), py(p.1))), RED, "fitted");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Points `(D_ij, d_ij)` with the identity line.
pub fn render_scatter_svg(data: &DMatrix<f64>, fitted: &DMatrix<f64>) -> Result<String> {
    let pairs = upper_pairs(data, fitted)?;
    let top = pairs.iter().fold(0.0f64, |m, p| m.max(p.0).max(p.1));
    let px = axis(0.0, top, MARGIN, SIZE - MARGIN);
    let py = axis(0.0, top, SIZE - MARGIN, MARGIN);
    let mut out = header(SIZE, SIZE);
    frame(&mut out, "data", "fitted distance");
    out += &polyline([(px(0.0), py(0.0)), (px(top), py(top))].into_iter(), BLUE, "identity");
    for (a, b) in pairs {
        let _ = writeln!(out, "<circle class=\"pair\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{RED}\"/>", px(a), py(b));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
