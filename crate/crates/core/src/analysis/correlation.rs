//! Embedding that maximizes the Pearson correlation between the data matrix
//! and the fitted Euclidean distances.
//!
//! Correlation ignores the overall scale of the configuration, so the
//! minimized function is `1 - r + (mean(d²)/mean(D²) - 1)²`. The penalty
//! vanishes after rescaling any configuration, which leaves the optimum in
//! `r` unchanged while removing the flat scale direction.

use nalgebra::DMatrix;

use super::metrics::pearson;
use super::{center_flat, coords_from_flat, random_coords, restart_rng, Embedding, EmbeddingMethod};
use crate::error::{Error, Result};
use crate::minimize::{minimize_projected, Analytic, MinimizeOptions};
use crate::par;
use crate::score::upper_triangle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationOptions {
    pub starts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub memory: usize,
    pub seed: u64,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self { starts: 8, max_iters: 5000, tol: 1e-15, memory: 10, seed: 0 }
    }
}

struct Target {
    centered: Vec<f64>,
    norm: f64,
    mean_sq: f64,
}

/// Value and gradient of the minimized function at flat coordinates `x`.
fn value_and_gradient(t: &Target, x: &[f64], n: usize, dim: usize, grad: Option<&mut [f64]>) -> f64 {
    let m = t.centered.len() as f64;
    let mut d = Vec::with_capacity(t.centered.len());
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = (0..dim).map(|a| (x[i * dim + a] - x[j * dim + a]).powi(2)).sum();
            d.push(s.sqrt());
        }
    }
    let mean_d = d.iter().sum::<f64>() / m;
    let b: Vec<f64> = d.iter().map(|v| v - mean_d).collect();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mean_sq = d.iter().map(|v| v * v).sum::<f64>() / m;
    let excess = mean_sq / t.mean_sq - 1.0;
    if !(bnorm > 0.0) {
        return f64::NAN;
    }
    let r = t.centered.iter().zip(&b).map(|(a, b)| a * b).sum::<f64>() / (t.norm * bnorm);
    let value = 1.0 - r + excess * excess;

    if let Some(g) = grad {
        g.iter_mut().for_each(|v| *v = 0.0);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let dr = t.centered[k] / (t.norm * bnorm) - r * b[k] / (bnorm * bnorm);
                let dp = 2.0 * excess * 2.0 * d[k] / (m * t.mean_sq);
                let coef = -dr + dp;
                if d[k] > 0.0 {
                    for a in 0..dim {
                        let u = (x[i * dim + a] - x[j * dim + a]) / d[k];
                        g[i * dim + a] += coef * u;
                        g[j * dim + a] -= coef * u;
                    }
                }
                k += 1;
            }
        }
    }
    value
}

/// `1 - r + scale penalty`; exposed for gradient checks.
pub fn correlation_objective(d: &DMatrix<f64>, x: &[f64], dim: usize, grad: Option<&mut [f64]>) -> Result<f64> {
    let t = target(d)?;
    Ok(value_and_gradient(&t, x, d.nrows(), dim, grad))
}

fn target(d: &DMatrix<f64>) -> Result<Target> {
    let upper = upper_triangle(d);
    if upper.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two upper-triangle entries".into()));
    }
    let m = upper.len() as f64;
    let mean = upper.iter().sum::<f64>() / m;
    let centered: Vec<f64> = upper.iter().map(|v| v - mean).collect();
    let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::UndefinedCorrelation("data matrix is constant off the diagonal".into()));
    }
    let mean_sq = upper.iter().map(|v| v * v).sum::<f64>() / m;
    Ok(Target { centered, norm, mean_sq })
}

pub fn correlation_embed(d: &DMatrix<f64>, dim: usize, opts: &CorrelationOptions) -> Result<Embedding> {
    if d.nrows() != d.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", d.nrows(), d.ncols())));
    }
    if dim == 0 {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    let n = d.nrows();
    let t = target(d)?;
    let mopts = MinimizeOptions { max_iters: opts.max_iters, tol: opts.tol, gtol: 1e-14, memory: opts.memory };
    let spread = t.mean_sq.sqrt();

    let runs = par::map_indexed(opts.starts.max(1), |s| {
        let mut rng = restart_rng(opts.seed, s);
        let x0 = random_coords(&mut rng, n, dim, spread);
        let mut obj = Analytic { fg: |x: &[f64], g: Option<&mut [f64]>| value_and_gradient(&t, x, n, dim, g) };
        minimize_projected(&mut obj, &x0, &mopts, |x| center_flat(x, dim))
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let best = par::argmin_by_key(&runs, |m| m.f).expect("at least one start");
    let coords = coords_from_flat(&runs[best].x, n, dim);

    let mut emb = Embedding::new(coords, EmbeddingMethod::Correlation);
    emb.r = Some(pearson(&upper_triangle(d), &upper_triangle(&emb.distances()))?);
    emb.seed = Some(opts.seed);
    Ok(emb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_triangle() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        // Constant off-diagonal: correlation undefined.
        assert!(matches!(
            correlation_embed(&d, 2, &CorrelationOptions::default()),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let d = DMatrix::from_row_slice(4, 4, &[
            0.0, 1.0, 2.0, 2.5, 1.0, 0.0, 1.5, 2.0, 2.0, 1.5, 0.0, 1.2, 2.5, 2.0, 1.2, 0.0,
        ]);
        let x = [0.1, 0.2, 1.3, -0.4, 0.5, 1.7, -1.0, 0.3];
        let mut g = [0.0; 8];
        correlation_objective(&d, &x, 2, Some(&mut g)).unwrap();
        for k in 0..8 {
            let h = 1e-6;
            let mut up = x;
            up[k] += h;
            let mut down = x;
            down[k] -= h;
            let fd = (correlation_objective(&d, &up, 2, None).unwrap()
                - correlation_objective(&d, &down, 2, None).unwrap())
                / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6 * g[k].abs().max(1.0), "{k}: {fd} vs {}", g[k]);
        }
    }
}
