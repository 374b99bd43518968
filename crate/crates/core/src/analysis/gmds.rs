//! Metric embedding by direct minimization of raw stress
//! `Σ_{i<j} (D[i,j] - ‖x_i - x_j‖)²`.

use nalgebra::DMatrix;

use super::{center_flat, check_distance_matrix, coords_from_flat, random_coords, restart_rng, Embedding, EmbeddingMethod};
use crate::error::{Error, Result};
use crate::minimize::{minimize_projected, Analytic, MinimizeOptions};
use crate::par;
use crate::score::upper_triangle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmdsOptions {
    pub starts: usize,
    pub max_iters: usize,
    /// Relative stress-decrease stop tolerance.
    pub tol: f64,
    /// Gradient-norm stop tolerance relative to `‖D‖`.
    pub gtol: f64,
    pub memory: usize,
    pub seed: u64,
}

impl Default for GmdsOptions {
    fn default() -> Self {
        Self { starts: 8, max_iters: 5000, tol: 1e-15, gtol: 1e-13, memory: 10, seed: 0 }
    }
}

/// Raw stress over the strict upper triangle; `x` is object-major flat coordinates.
pub fn raw_stress(d: &DMatrix<f64>, x: &[f64], dim: usize) -> f64 {
    stress_and_gradient(d, x, dim, None)
}

/// Closed-form stress gradient. Pairs at zero distance contribute nothing.
pub fn stress_gradient(d: &DMatrix<f64>, x: &[f64], dim: usize, grad: &mut [f64]) -> f64 {
    stress_and_gradient(d, x, dim, Some(grad))
}

fn stress_and_gradient(d: &DMatrix<f64>, x: &[f64], dim: usize, mut grad: Option<&mut [f64]>) -> f64 {
    let n = d.nrows();
    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut stress = 0.0;
    let mut diff = vec![0.0; dim];
    for i in 0..n {
        for j in i + 1..n {
            let mut dist2 = 0.0;
            for a in 0..dim {
                diff[a] = x[i * dim + a] - x[j * dim + a];
                dist2 += diff[a] * diff[a];
            }
            let dist = dist2.sqrt();
            let r = d[(i, j)] - dist;
            stress += r * r;
            if let Some(g) = grad.as_deref_mut() {
                if dist > 0.0 {
                    let c = -2.0 * r / dist;
                    for a in 0..dim {
                        g[i * dim + a] += c * diff[a];
                        g[j * dim + a] -= c * diff[a];
                    }
                }
            }
        }
    }
    stress
}

/// Best-of-`starts` stress minimization from random centered configurations.
/// Every iterate is re-centered so each axis has zero mean.
pub fn gmds_embed(d: &DMatrix<f64>, dim: usize, opts: &GmdsOptions) -> Result<Embedding> {
    check_distance_matrix(d)?;
    let n = d.nrows();
    if dim == 0 || dim >= n {
        return Err(Error::Dimension(format!("dimension {dim} must be in 1..{n}")));
    }
    let upper = upper_triangle(d);
    let norm = upper.iter().map(|v| v * v).sum::<f64>().sqrt();
    let spread = if norm > 0.0 { norm / (upper.len() as f64).sqrt() } else { 1.0 };
    let mopts = MinimizeOptions {
        max_iters: opts.max_iters,
        tol: opts.tol,
        gtol: opts.gtol * norm.max(f64::MIN_POSITIVE),
        memory: opts.memory,
    };

    let runs = par::map_indexed(opts.starts.max(1), |s| {
        let mut rng = restart_rng(opts.seed, s);
        let x0 = random_coords(&mut rng, n, dim, spread);
        let mut obj = Analytic { fg: |x: &[f64], g: Option<&mut [f64]>| stress_and_gradient(d, x, dim, g) };
        minimize_projected(&mut obj, &x0, &mopts, |x| center_flat(x, dim))
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let best = par::argmin_by_key(&runs, |m| m.f).expect("at least one start");
    let m = &runs[best];

    let mut emb = Embedding::new(coords_from_flat(&m.x, n, dim), EmbeddingMethod::Gmds);
    emb.seed = Some(opts.seed);
    emb.stress = Some(m.f);
    Ok(emb)
}
