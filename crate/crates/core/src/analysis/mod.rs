//! Analysis of a dissimilarity (or distance) matrix: block clustering,
//! embeddings (stress, classical and correlation-based), K-means, and
//! quality metrics for comparing data and fitted distances.
//!
//! Matrices are plain `DMatrix<f64>`; point sets are `N x n` matrices with
//! one object per row.

mod cluster;
mod correlation;
mod gmds;
mod kmeans;
mod metrics;
mod procrustes;
mod torgerson;

pub use cluster::{
    block_cluster, block_objective, brute_force_block_cluster, cluster_centroids, ClusterAssignment, GaOptions,
};
pub use correlation::{correlation_embed, correlation_objective, CorrelationOptions};
pub use gmds::{gmds_embed, raw_stress, stress_gradient, GmdsOptions};
pub use kmeans::{kmeans, KMeansResult};
pub use metrics::{
    check_distance_matrix, distances_from_coords, least_squares_rescale, pca_project, pearson_r, quality,
    triangle_violations, QualityReport, TriangleReport,
};
pub use procrustes::{fit_similarity_2d, SimilarityFit};
pub use torgerson::torgerson_embed;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMethod {
    Gmds,
    Torgerson,
    Correlation,
    Projection,
}

impl std::fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gmds => "gmds",
            Self::Torgerson => "torgerson",
            Self::Correlation => "correlation",
            Self::Projection => "projection",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    /// One row per object.
    pub coords: DMatrix<f64>,
    pub method: EmbeddingMethod,
    pub seed: Option<u64>,
    /// Final raw stress (gmds).
    pub stress: Option<f64>,
    /// Final Pearson correlation between data and fitted distances (correlation).
    pub r: Option<f64>,
    /// Number of eigenvalues above threshold (torgerson).
    pub usable_terms: Option<usize>,
    /// Eigenvalues of the double-centered matrix, descending (torgerson).
    pub eigenvalues: Option<Vec<f64>>,
    /// Sum of |λ| over eigenvalues below minus the threshold (torgerson).
    pub negative_eigen_mass: Option<f64>,
    pub warnings: Vec<String>,
}

impl Embedding {
    pub(crate) fn new(coords: DMatrix<f64>, method: EmbeddingMethod) -> Self {
        Self {
            coords,
            method,
            seed: None,
            stress: None,
            r: None,
            usable_terms: None,
            eigenvalues: None,
            negative_eigen_mass: None,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn distances(&self) -> DMatrix<f64> {
        distances_from_coords(&self.coords)
    }
}

/// Independent RNG per restart: same seed, distinct stream.
pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

pub(crate) fn random_coords(rng: &mut impl Rng, n: usize, dim: usize, spread: f64) -> Vec<f64> {
    (0..n * dim).map(|_| spread * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Row-major flat coordinates (object-major) to an `n x dim` matrix.
pub(crate) fn coords_from_flat(x: &[f64], n: usize, dim: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, dim, x)
}

/// Subtracts the per-axis mean from object-major flat coordinates.
pub(crate) fn center_flat(x: &mut [f64], dim: usize) {
    let n = x.len() / dim;
    for a in 0..dim {
        let mean = (0..n).map(|i| x[i * dim + a]).sum::<f64>() / n as f64;
        for i in 0..n {
            x[i * dim + a] -= mean;
        }
    }
}
