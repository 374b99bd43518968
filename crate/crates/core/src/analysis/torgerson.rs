//! Classical (Torgerson) scaling: eigendecomposition of the double-centered
//! squared-distance matrix, keeping only positive-eigenvalue components.

use nalgebra::DMatrix;

use super::metrics::sorted_eigen;
use super::{check_distance_matrix, Embedding, EmbeddingMethod};
use crate::error::{Error, Result};

/// Eigenvalues at or below this fraction of the largest are not usable.
pub const EIGEN_THRESHOLD: f64 = 1e-9;

pub fn torgerson_embed(d: &DMatrix<f64>, dim: usize) -> Result<Embedding> {
    check_distance_matrix(d)?;
    let n = d.nrows();
    if dim == 0 || n == 0 {
        return Err(Error::Dimension(format!("dimension {dim} for {n} objects")));
    }
    // T = -1/2 J D² J with J = I - 11ᵀ/n, written out as double centering.
    let sq = d.map(|v| v * v);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let t = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let (values, vectors) = sorted_eigen(t);
    let lead = values[0].max(0.0);
    let eps = EIGEN_THRESHOLD * lead;
    let usable = values.iter().filter(|&&v| v > eps && lead > 0.0).count();
    let negative_mass: f64 = values.iter().filter(|&&v| v < -eps).map(|v| -v).sum();

    let keep = dim.min(usable);
    let mut coords = DMatrix::zeros(n, keep);
    for c in 0..keep {
        let s = values[c].sqrt();
        for i in 0..n {
            coords[(i, c)] = s * vectors[(i, c)];
        }
    }
    let mut emb = Embedding::new(coords, EmbeddingMethod::Torgerson);
    if keep < dim {
        emb.warnings.push(format!(
            "requested {dim} dimensions but only {usable} eigenvalues are positive; output truncated to {keep}"
        ));
    }
    emb.usable_terms = Some(usable);
    emb.eigenvalues = Some(values);
    emb.negative_eigen_mass = Some(negative_mass);
    Ok(emb)
}
