//! Polygonal shapes under the even-odd fill rule, similarity transforms, and
//! exact area / overlap computation.

mod monte_carlo;
mod sweep;

pub use monte_carlo::{mc_overlap_oracle, McOverlap};
pub use sweep::{overlap, shape_area, shape_centroid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consecutive vertices closer than this (relative to the ring extent) are merged.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

/// A closed polygonal ring; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    vertices: Vec<Point>,
}

impl Ring {
    /// Builds a ring, merging consecutive (and wrap-around) duplicate vertices.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidRing(format!("non-finite vertex ({}, {})", p.x, p.y)));
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidRing(format!(
                "{} vertices, at least 3 required",
                vertices.len()
            )));
        }
        let extent = bbox_of(vertices.iter().copied())
            .map(|b| (b.max.x - b.min.x).max(b.max.y - b.min.y))
            .unwrap_or(0.0);
        let tol = SNAP_TOLERANCE * extent.max(f64::MIN_POSITIVE);
        let close = |a: &Point, b: &Point| (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol;

        let mut cleaned: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if cleaned.last().is_none_or(|q| !close(q, &p)) {
                cleaned.push(p);
            }
        }
        while cleaned.len() > 1 && close(&cleaned[0], cleaned.last().unwrap()) {
            cleaned.pop();
        }
        if cleaned.len() < 3 {
            return Err(Error::InvalidRing(format!(
                "{} distinct vertices after merging duplicates, at least 3 required",
                cleaned.len()
            )));
        }
        Ok(Self { vertices: cleaned })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices }
    }
}

/// Signed shoelace area; counterclockwise rings are positive.
pub fn ring_area(ring: &Ring) -> f64 {
    let v = ring.vertices();
    let n = v.len();
    // Anchor at the first vertex to limit cancellation for offset rings.
    let o = v[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        let a = v[i];
        let b = v[i + 1];
        twice += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    }
    0.5 * twice
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }
}

fn bbox_of(points: impl Iterator<Item = Point>) -> Option<BoundingBox> {
    points.fold(None, |acc, p| {
        Some(match acc {
            None => BoundingBox { min: p, max: p },
            Some(b) => BoundingBox {
                min: Point::new(b.min.x.min(p.x), b.min.y.min(p.y)),
                max: Point::new(b.max.x.max(p.x), b.max.y.max(p.y)),
            },
        })
    })
}

/// A named set of rings. Holes and islands are both plain rings; the filled
/// region is every point covered by an odd number of rings.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    name: String,
    rings: Vec<Ring>,
}

impl Shape {
    pub fn new(name: impl Into<String>, rings: Vec<Ring>) -> Result<Self> {
        let name = name.into();
        if rings.is_empty() {
            return Err(Error::InvalidInput(format!("shape `{name}` has no rings")));
        }
        let shape = Self { name, rings };
        let area = sweep::even_odd_area(&shape);
        if !(area > 0.0) {
            return Err(Error::DegenerateShape { name: shape.name, area });
        }
        Ok(shape)
    }

    /// Convenience constructor from raw coordinate rings.
    pub fn from_coords(name: impl Into<String>, rings: &[Vec<[f64; 2]>]) -> Result<Self> {
        let rings = rings
            .iter()
            .map(|r| Ring::new(r.iter().map(|&p| p.into()).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, rings)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.rings.iter().map(Ring::len).sum()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        bbox_of(self.rings.iter().flat_map(|r| r.vertices().iter().copied()))
            .expect("shape has at least one ring")
    }

    pub fn to_coords(&self) -> Vec<Vec<[f64; 2]>> {
        self.rings
            .iter()
            .map(|r| r.vertices().iter().map(|p| [p.x, p.y]).collect())
            .collect()
    }
}

/// Scale, rotation and translation applied as `p -> scale * R(angle) * p + t`.
/// The scale is stored as its logarithm so it is positive by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub log_scale: f64,
    pub angle: f64,
    pub tx: f64,
    pub ty: f64,
}

impl SimilarityTransform {
    pub const IDENTITY: Self = Self { log_scale: 0.0, angle: 0.0, tx: 0.0, ty: 0.0 };

    pub fn new(log_scale: f64, angle: f64, tx: f64, ty: f64) -> Self {
        Self { log_scale, angle, tx, ty }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self { tx, ty, ..Self::IDENTITY }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn apply(&self, p: Point) -> Point {
        let s = self.scale();
        let (sin, cos) = self.angle.sin_cos();
        Point::new(
            s * (cos * p.x - sin * p.y) + self.tx,
            s * (sin * p.x + cos * p.y) + self.ty,
        )
    }

    pub fn inverse(&self) -> Self {
        let s = (-self.log_scale).exp();
        let (sin, cos) = (-self.angle).sin_cos();
        Self {
            log_scale: -self.log_scale,
            angle: -self.angle,
            tx: -s * (cos * self.tx - sin * self.ty),
            ty: -s * (sin * self.tx + cos * self.ty),
        }
    }
}

/// Maps every vertex through `t`; ring structure is unchanged.
pub fn apply_transform(shape: &Shape, t: &SimilarityTransform) -> Shape {
    let s = t.scale();
    let (sin, cos) = t.angle.sin_cos();
    let (a, b) = (s * cos, s * sin);
    let rings = shape
        .rings
        .iter()
        .map(|r| Ring {
            vertices: r
                .vertices
                .iter()
                .map(|p| Point::new(a * p.x - b * p.y + t.tx, b * p.x + a * p.y + t.ty))
                .collect(),
        })
        .collect();
    Shape { name: shape.name.clone(), rings }
}

/// Area bookkeeping for two overlaid shapes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OverlapResult {
    pub area_a: f64,
    pub area_b: f64,
    pub intersection: f64,
    /// Part of `a` not covered by `b`.
    pub delta_a: f64,
    /// Part of `b` not covered by `a`.
    pub delta_b: f64,
}

impl OverlapResult {
    pub fn symmetric_difference(&self) -> f64 {
        self.delta_a + self.delta_b
    }
}
