#![allow(dead_code)]

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapesim::geometry::{Shape, SimilarityTransform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn square(name: &str, x: f64, y: f64, side: f64) -> Shape {
    Shape::from_coords(name, &[vec![[x, y], [x + side, y], [x + side, y + side], [x, y + side]]]).unwrap()
}

/// Star-shaped shape around the origin with one vertex per angular sector,
/// sometimes with a small island.
pub fn random_shape(rng: &mut impl Rng, name: &str) -> Shape {
    let ring = |rng: &mut dyn rand::RngCore, c: [f64; 2], scale: f64, n: usize| -> Vec<[f64; 2]> {
        (0..n)
            .map(|k| {
                let a = TAU * (k as f64 + rng.random::<f64>()) / n as f64;
                let r = scale * rng.random_range(0.4..1.0);
                [c[0] + r * a.cos(), c[1] + r * a.sin()]
            })
            .collect()
    };
    let n = rng.random_range(6..16);
    let mut rings = vec![ring(rng, [0.0, 0.0], 1.0, n)];
    if rng.random::<f64>() < 0.25 {
        let m = rng.random_range(4..8);
        rings.push(ring(rng, [1.6, 0.3], 0.3, m));
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

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, dim, |_, _| rng.random::<f64>())
}

pub fn euclidean(points: &DMatrix<f64>) -> DMatrix<f64> {
    let n = points.nrows();
    DMatrix::from_fn(n, n, |i, j| (points.row(i) - points.row(j)).norm())
}

/// Orthogonal Procrustes residual `min ‖X R + t - Y‖_F` over rotations,
/// reflections and translations.
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
    (xc * (svd.u.unwrap() * svd.v_t.unwrap()) - yc).norm()
}

/// Matrix CSV in the `label,<labels...>` layout.
pub fn write_matrix(path: &Path, labels: &[String], d: &DMatrix<f64>) {
    let mut text = format!("label,{}\n", labels.join(","));
    for (i, l) in labels.iter().enumerate() {
        let row: Vec<String> = (0..d.ncols()).map(|j| format!("{:.4}", d[(i, j)])).collect();
        text += &format!("{l},{}\n", row.join(","));
    }
    std::fs::write(path, text).unwrap();
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}
