#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapesim::geometry::{Shape, SimilarityTransform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn square(name: &str, x: f64, y: f64, side: f64) -> Shape {
    Shape::from_coords(name, &[vec![[x, y], [x + side, y], [x + side, y + side], [x, y + side]]]).unwrap()
}

/// Regular polygon with `n` vertices and the given area, centered at `c`.
pub fn disk(name: &str, n: usize, area: f64, c: [f64; 2]) -> Shape {
    let r = (2.0 * area / (n as f64 * (TAU / n as f64).sin())).sqrt();
    let ring = (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect();
    Shape::from_coords(name, &[ring]).unwrap()
}

/// Star-shaped ring around `c`: sorted random angles, random radii, so
/// generally concave but always simple.
pub fn star_ring(rng: &mut impl Rng, c: [f64; 2], scale: f64, vertices: usize) -> Vec<[f64; 2]> {
    let mut angles: Vec<f64> = (0..vertices).map(|_| rng.random::<f64>() * TAU).collect();
    angles.sort_by(f64::total_cmp);
    angles
        .into_iter()
        .map(|a| {
            let r = scale * rng.random_range(0.4..1.0);
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect()
}

/// Random star shape, sometimes with an island.
pub fn random_shape(rng: &mut impl Rng, name: &str) -> Shape {
    let n = rng.random_range(6..16);
    let mut rings = vec![star_ring(rng, [0.0, 0.0], 1.0, n)];
    if rng.random::<f64>() < 0.25 {
        let m = rng.random_range(4..8);
        rings.push(star_ring(rng, [1.6, 0.3], 0.3, m));
    }
    Shape::from_coords(name, &rings).unwrap()
}

pub fn random_transform(rng: &mut impl Rng) -> SimilarityTransform {
    SimilarityTransform::new(
        rng.random_range((0.25f64).ln()..(4.0f64).ln()),
        rng.random_range(0.0..TAU),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    )
}

use nalgebra::DMatrix;

/// Uniform random points in the unit cube of the given dimension.
pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, dim, |_, _| rng.random::<f64>())
}

pub fn euclidean(points: &DMatrix<f64>) -> DMatrix<f64> {
    let n = points.nrows();
    DMatrix::from_fn(n, n, |i, j| (points.row(i) - points.row(j)).norm())
}

/// Orthogonal Procrustes (rotation + reflection + translation) residual
/// `‖X R + t - Y‖_F` via SVD of the cross-covariance.
pub fn procrustes_residual(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let center = |m: &DMatrix<f64>| {
        let mean = m.row_mean();
        let mut c = m.clone();
        for mut row in c.row_iter_mut() {
            row -= &mean;
        }
        c
    };
    let (xc, yc) = (center(x), center(y));
    let svd = (xc.transpose() * &yc).svd(true, true);
    let r = svd.u.unwrap() * svd.v_t.unwrap();
    (xc * r - yc).norm()
}

/// Two tight, well-separated planar blobs of `per` points each.
pub fn two_blobs(rng: &mut impl Rng, per: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * per, 2, |i, _| {
        let base = if i < per { 0.0 } else { 10.0 };
        base + rng.random::<f64>()
    })
}
