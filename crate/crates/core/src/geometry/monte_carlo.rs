//! Monte Carlo estimate of overlap areas, used to cross-check the exact sweep.
//! Membership is decided by horizontal ray casting, which shares no code with
//! the slab decomposition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OverlapResult, Point, Shape};
use crate::error::{Error, Result};
use crate::par;

const CHUNK: usize = 1 << 16;
const STRIPS: usize = 64;

/// Overlap estimate with one standard error per field.
#[derive(Debug, Clone, Copy)]
pub struct McOverlap {
    pub estimate: OverlapResult,
    pub std_error: OverlapResult,
    /// Area covered by exactly one shape, counted directly so its standard
    /// error is that of a single proportion.
    pub symmetric_difference: f64,
    pub symmetric_difference_se: f64,
    pub samples: usize,
}

/// Edges bucketed into horizontal strips so a point only tests the edges
/// that can straddle its ordinate.
struct StripIndex {
    y0: f64,
    inv_h: f64,
    strips: Vec<Vec<(Point, Point)>>,
}

impl StripIndex {
    fn new(shape: &Shape, y0: f64, y1: f64) -> Self {
        let h = (y1 - y0) / STRIPS as f64;
        let inv_h = if h > 0.0 { 1.0 / h } else { 0.0 };
        let mut strips = vec![Vec::new(); STRIPS];
        for ring in shape.rings() {
            for (p, q) in ring.edges() {
                let lo = p.y.min(q.y);
                let hi = p.y.max(q.y);
                let s0 = (((lo - y0) * inv_h).floor().max(0.0) as usize).min(STRIPS - 1);
                let s1 = (((hi - y0) * inv_h).floor().max(0.0) as usize).min(STRIPS - 1);
                for s in &mut strips[s0..=s1] {
                    s.push((p, q));
                }
            }
        }
        Self { y0, inv_h, strips }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let s = (((y - self.y0) * self.inv_h).floor().max(0.0) as usize).min(STRIPS - 1);
        let mut inside = false;
        for (p, q) in &self.strips[s] {
            if (p.y > y) != (q.y > y) {
                let xc = p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
                if x < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Uniform sampling over the joint bounding box. `samples` must be at least 10⁴.
pub fn mc_overlap_oracle(a: &Shape, b: &Shape, samples: usize, seed: u64) -> Result<McOverlap> {
    if samples < 10_000 {
        return Err(Error::InvalidInput(format!("{samples} samples, at least 10000 required")));
    }
    let bb = a.bounding_box().union(&b.bounding_box());
    let box_area = bb.area();
    if !(box_area > 0.0) {
        return Err(Error::EmptyBoundingBox);
    }
    let ia = StripIndex::new(a, bb.min.y, bb.max.y);
    let ib = StripIndex::new(b, bb.min.y, bb.max.y);

    let chunks = samples.div_ceil(CHUNK);
    let counts = par::map_indexed(chunks, |c| {
        let n = CHUNK.min(samples - c * CHUNK);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let (mut na, mut nb, mut ni) = (0u64, 0u64, 0u64);
        for _ in 0..n {
            let x = bb.min.x + rng.random::<f64>() * bb.width();
            let y = bb.min.y + rng.random::<f64>() * bb.height();
            let in_a = ia.contains(x, y);
            let in_b = ib.contains(x, y);
            na += in_a as u64;
            nb += in_b as u64;
            ni += (in_a && in_b) as u64;
        }
        (na, nb, ni)
    });
    let (na, nb, ni) = counts
        .into_iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));

    let n = samples as f64;
    let est = |k: u64| box_area * k as f64 / n;
    let se = |k: u64| {
        let p = k as f64 / n;
        box_area * (p * (1.0 - p) / n).sqrt()
    };
    Ok(McOverlap {
        estimate: OverlapResult {
            area_a: est(na),
            area_b: est(nb),
            intersection: est(ni),
            delta_a: est(na - ni),
            delta_b: est(nb - ni),
        },
        std_error: OverlapResult {
            area_a: se(na),
            area_b: se(nb),
            intersection: se(ni),
            delta_a: se(na - ni),
            delta_b: se(nb - ni),
        },
        symmetric_difference: est(na + nb - 2 * ni),
        symmetric_difference_se: se(na + nb - 2 * ni),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(name: &str, x: f64) -> Shape {
        Shape::from_coords(name, &[vec![[x, 0.0], [x + 1.0, 0.0], [x + 1.0, 1.0], [x, 1.0]]]).unwrap()
    }

    #[test]
    fn half_overlap_within_three_sigma() {
        let mc = mc_overlap_oracle(&square("a", 0.0), &square("b", 0.5), 1_000_000, 7).unwrap();
        assert!((mc.estimate.intersection - 0.5).abs() < 3.0 * mc.std_error.intersection);
    }

    #[test]
    fn identical_and_disjoint() {
        let a = square("a", 0.0);
        let mc = mc_overlap_oracle(&a, &a, 100_000, 1).unwrap();
        assert_eq!(mc.estimate.delta_a, 0.0);
        assert_eq!(mc.estimate.delta_b, 0.0);
        let mc = mc_overlap_oracle(&a, &square("b", 2.0), 100_000, 1).unwrap();
        assert_eq!(mc.estimate.intersection, 0.0);
    }

    #[test]
    fn rejects_small_sample_counts() {
        let a = square("a", 0.0);
        assert!(mc_overlap_oracle(&a, &a, 100, 1).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let a = square("a", 0.0);
        let b = square("b", 0.3);
        let x = mc_overlap_oracle(&a, &b, 200_000, 42).unwrap();
        let y = mc_overlap_oracle(&a, &b, 200_000, 42).unwrap();
        assert_eq!(x.estimate, y.estimate);
    }
}
