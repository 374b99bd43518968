//! Exact even-odd areas by vertical slab decomposition.
//!
//! Every vertex abscissa and every edge/edge crossing abscissa is an event.
//! Between two consecutive events no edges cross, so the vertical slice of
//! any even-odd region is a fixed alternating sequence of edges and its
//! length varies linearly in x. The midpoint rule is then exact per slab.
//! Degenerate configurations (vertical edges, shared vertices, collinear
//! overlaps) only produce zero-width slabs or zero-length intervals.

use super::{OverlapResult, Point, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Edge {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    owner: u8,
}

impl Edge {
    fn y_at(&self, x: f64) -> f64 {
        self.y0 + (self.y1 - self.y0) * ((x - self.x0) / (self.x1 - self.x0))
    }

    fn y_range(&self) -> (f64, f64) {
        if self.y0 <= self.y1 {
            (self.y0, self.y1)
        } else {
            (self.y1, self.y0)
        }
    }
}

fn push_edges(shape: &Shape, owner: u8, out: &mut Vec<Edge>) {
    for ring in shape.rings() {
        for (p, q) in ring.edges() {
            // Vertical edges bound zero-width slabs only.
            if p.x == q.x {
                continue;
            }
            let (a, b) = if p.x < q.x { (p, q) } else { (q, p) };
            out.push(Edge { x0: a.x, y0: a.y, x1: b.x, y1: b.y, owner });
        }
    }
}

/// Abscissa where two segments cross strictly inside both, if they do.
fn crossing_x(e: &Edge, f: &Edge) -> Option<f64> {
    let p = Point::new(e.x0, e.y0);
    let r = Point::new(e.x1 - e.x0, e.y1 - e.y0);
    let q = Point::new(f.x0, f.y0);
    let s = Point::new(f.x1 - f.x0, f.y1 - f.y0);
    let denom = r.x * s.y - r.y * s.x;
    if denom == 0.0 {
        return None;
    }
    let qp = Point::new(q.x - p.x, q.y - p.y);
    let t = (qp.x * s.y - qp.y * s.x) / denom;
    let u = (qp.x * r.y - qp.y * r.x) / denom;
    if t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0 {
        Some(p.x + t * r.x)
    } else {
        None
    }
}

/// Sorted, deduplicated event abscissae. `edges` must be sorted by `x0`.
fn events(edges: &[Edge]) -> Vec<f64> {
    let mut xs: Vec<f64> = Vec::with_capacity(edges.len() * 2);
    for e in edges {
        xs.push(e.x0);
        xs.push(e.x1);
    }
    for (i, e) in edges.iter().enumerate() {
        let (ey0, ey1) = e.y_range();
        for f in &edges[i + 1..] {
            if f.x0 >= e.x1 {
                break;
            }
            let (fy0, fy1) = f.y_range();
            if fy1 < ey0 || fy0 > ey1 {
                continue;
            }
            if let Some(x) = crossing_x(e, f) {
                xs.push(x);
            }
        }
    }
    xs.sort_unstable_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Walks the slabs left to right, handing each one the active edges sorted
/// bottom-to-top at the slab midpoint.
fn for_each_slab(mut edges: Vec<Edge>, mut visit: impl FnMut(f64, f64, &[Edge])) {
    edges.sort_unstable_by(|a, b| a.x0.total_cmp(&b.x0));
    let xs = events(&edges);
    let mut next = 0;
    let mut active: Vec<Edge> = Vec::new();
    let mut keyed: Vec<(f64, Edge)> = Vec::new();
    let mut ordered: Vec<Edge> = Vec::new();
    for w in xs.windows(2) {
        let (xl, xr) = (w[0], w[1]);
        let xm = 0.5 * (xl + xr);
        while next < edges.len() && edges[next].x0 < xm {
            active.push(edges[next]);
            next += 1;
        }
        active.retain(|e| e.x1 > xm);
        if active.is_empty() {
            continue;
        }
        keyed.clear();
        keyed.extend(active.iter().map(|e| (e.y_at(xm), *e)));
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        ordered.clear();
        ordered.extend(keyed.iter().map(|(_, e)| *e));
        visit(xl, xr, &ordered);
    }
}

/// Even-odd slice lengths `(len_a, len_b, len_both)` at abscissa `x`, using
/// the slab's fixed edge order.
fn slice_lengths(x: f64, ordered: &[Edge]) -> (f64, f64, f64) {
    let (mut in_a, mut in_b) = (false, false);
    let (mut la, mut lb, mut li) = (0.0, 0.0, 0.0);
    let mut prev = 0.0;
    for e in ordered {
        let y = e.y_at(x);
        let seg = y - prev;
        if in_a {
            la += seg;
        }
        if in_b {
            lb += seg;
        }
        if in_a && in_b {
            li += seg;
        }
        if e.owner == 0 {
            in_a = !in_a;
        } else {
            in_b = !in_b;
        }
        prev = y;
    }
    (la, lb, li)
}

fn measure(edges: Vec<Edge>) -> (f64, f64, f64) {
    let (mut a, mut b, mut i) = (0.0, 0.0, 0.0);
    for_each_slab(edges, |xl, xr, ordered| {
        let w = xr - xl;
        let (la, lb, li) = slice_lengths(0.5 * (xl + xr), ordered);
        a += w * la;
        b += w * lb;
        i += w * li;
    });
    (a, b, i)
}

pub(super) fn even_odd_area(shape: &Shape) -> f64 {
    let mut edges = Vec::with_capacity(shape.vertex_count());
    push_edges(shape, 0, &mut edges);
    measure(edges).0
}

/// Even-odd area of the union of the shape's rings.
pub fn shape_area(shape: &Shape) -> Result<f64> {
    let area = even_odd_area(shape);
    if area > 0.0 {
        Ok(area)
    } else {
        Err(Error::DegenerateShape { name: shape.name().to_string(), area })
    }
}

/// Area centroid of the even-odd region.
pub fn shape_centroid(shape: &Shape) -> Point {
    let mut edges = Vec::with_capacity(shape.vertex_count());
    push_edges(shape, 0, &mut edges);
    let (mut area, mut mx, mut my) = (0.0, 0.0, 0.0);
    for_each_slab(edges, |xl, xr, ordered| {
        let xm = 0.5 * (xl + xr);
        // Per interval, length is linear and (hi² - lo²)/2 quadratic in x,
        // so Simpson's rule is exact on the slab.
        let (mut l, mut lx, mut q) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        for (k, x) in [xl, xm, xr].into_iter().enumerate() {
            let mut inside = false;
            let mut lo = 0.0;
            for e in ordered {
                let y = e.y_at(x);
                if inside {
                    l[k] += y - lo;
                    q[k] += 0.5 * (y * y - lo * lo);
                }
                inside = !inside;
                lo = y;
            }
            lx[k] = x * l[k];
        }
        let w = xr - xl;
        area += w * l[1];
        mx += w / 6.0 * (lx[0] + 4.0 * lx[1] + lx[2]);
        my += w / 6.0 * (q[0] + 4.0 * q[1] + q[2]);
    });
    Point::new(mx / area, my / area)
}

/// Areas of two shapes, of their intersection, and of each one's uncovered part.
pub fn overlap(a: &Shape, b: &Shape) -> Result<OverlapResult> {
    let mut edges = Vec::with_capacity(a.vertex_count() + b.vertex_count());
    push_edges(a, 0, &mut edges);
    push_edges(b, 1, &mut edges);
    let (area_a, area_b, intersection) = measure(edges);
    let tol = 1e-9 * area_a.max(area_b);
    let delta_a = area_a - intersection;
    let delta_b = area_b - intersection;
    if delta_a < -tol || delta_b < -tol || intersection < -tol || !intersection.is_finite() {
        return Err(Error::GeometryRobustness(format!(
            "`{}` vs `{}`: areas {area_a}, {area_b}, intersection {intersection}",
            a.name(),
            b.name()
        )));
    }
    Ok(OverlapResult {
        area_a,
        area_b,
        intersection: intersection.max(0.0),
        delta_a: delta_a.max(0.0),
        delta_b: delta_b.max(0.0),
    })
}
