//! Block-matrix clustering: choose a one-cluster-per-object assignment that
//! minimizes the sum of intra-cluster entries of the data matrix.

use nalgebra::DMatrix;
use rand::Rng;

use super::restart_rng;
use crate::error::{Error, Result};
use crate::par;

/// Hard assignment of `N` objects to `k` clusters (some may be empty).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    /// Cluster of each object, `0..k`.
    pub labels: Vec<usize>,
    /// Representative object per cluster; `None` for empty clusters.
    pub centroid_index: Vec<Option<usize>>,
    /// Criterion minimized by the producer: the block objective for block
    /// clustering, the within-cluster sum of squares for K-means.
    pub objective: f64,
}

impl ClusterAssignment {
    /// The `k x N` binary membership matrix.
    pub fn membership(&self) -> DMatrix<u8> {
        let mut x = DMatrix::zeros(self.k, self.labels.len());
        for (n, &c) in self.labels.iter().enumerate() {
            x[(c, n)] = 1;
        }
        x
    }

    /// Reads labels back from a membership matrix whose columns each hold exactly one 1.
    pub fn labels_from_membership(x: &DMatrix<u8>) -> Result<Vec<usize>> {
        (0..x.ncols())
            .map(|n| {
                let col = x.column(n);
                if col.iter().any(|&v| v > 1) {
                    return Err(Error::InvalidAssignment(format!("column {n} has a non-binary entry")));
                }
                let ones: Vec<usize> = col.iter().enumerate().filter(|(_, &v)| v == 1).map(|(k, _)| k).collect();
                match ones.as_slice() {
                    [k] => Ok(*k),
                    _ => Err(Error::InvalidAssignment(format!("column {n} sums to {}", ones.len()))),
                }
            })
            .collect()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &c)| c == cluster).map(|(i, _)| i).collect()
    }

    /// Number of non-empty clusters.
    pub fn effective_k(&self) -> usize {
        let mut used = vec![false; self.k];
        self.labels.iter().for_each(|&c| used[c] = true);
        used.into_iter().filter(|&u| u).count()
    }

    pub fn is_centroid(&self, object: usize) -> bool {
        self.centroid_index.get(self.labels[object]).copied().flatten() == Some(object)
    }
}

/// `Σ_m Σ_n Q[m,n] D[m,n]` with `Q[m,n] = 1` when `m` and `n` share a cluster.
fn labels_objective(d: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for m in 0..n {
        for j in 0..n {
            if labels[m] == labels[j] {
                total += d[(m, j)];
            }
        }
    }
    total
}

/// Sum of the block matrix `B = (XᵀX) ∘ D`.
pub fn block_objective(d: &DMatrix<f64>, x: &DMatrix<u8>) -> Result<f64> {
    if d.nrows() != d.ncols() || x.ncols() != d.nrows() {
        return Err(Error::Dimension(format!(
            "membership {}x{} for a {}x{} matrix",
            x.nrows(),
            x.ncols(),
            d.nrows(),
            d.ncols()
        )));
    }
    let labels = ClusterAssignment::labels_from_membership(x)?;
    Ok(labels_objective(d, &labels))
}

/// "Mean" centroid per cluster: the member minimizing the sum of squared
/// dissimilarities to the other members, lowest index on ties.
pub fn cluster_centroids(d: &DMatrix<f64>, k: usize, labels: &[usize]) -> Vec<Option<usize>> {
    (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let mut best: Option<(usize, f64)> = None;
            for &i in &members {
                let s: f64 = members.iter().map(|&j| d[(i, j)] * d[(i, j)]).sum();
                if best.is_none_or(|(_, b)| s < b) {
                    best = Some((i, s));
                }
            }
            best.map(|(i, _)| i)
        })
        .collect()
}

fn assignment(d: &DMatrix<f64>, k: usize, labels: Vec<usize>) -> ClusterAssignment {
    ClusterAssignment {
        k,
        centroid_index: cluster_centroids(d, k, &labels),
        objective: labels_objective(d, &labels),
        labels,
    }
}

fn check_k(d: &DMatrix<f64>, k: usize) -> Result<()> {
    if d.nrows() != d.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", d.nrows(), d.ncols())));
    }
    if k == 0 || k > d.nrows() {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={}", d.nrows())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaOptions {
    pub population: usize,
    pub generations: usize,
    /// Probability that a child has one object reassigned at random.
    pub mutation_rate: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GaOptions {
    fn default() -> Self {
        Self { population: 50, generations: 500, mutation_rate: 0.2, restarts: 5, seed: 0 }
    }
}

fn run_ga(d: &DMatrix<f64>, k: usize, opts: &GaOptions, restart: usize) -> (f64, Vec<usize>) {
    let n = d.nrows();
    let mut rng = restart_rng(opts.seed, restart);
    let pop_size = opts.population.max(2);
    let mut pop: Vec<(f64, Vec<usize>)> = (0..pop_size)
        .map(|_| {
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            (labels_objective(d, &labels), labels)
        })
        .collect();

    let best_of = |pop: &[(f64, Vec<usize>)]| par::argmin_by_key(pop, |p| p.0).expect("non-empty population");

    for _ in 0..opts.generations {
        let elite = pop[best_of(&pop)].clone();
        let mut next = Vec::with_capacity(pop_size);
        next.push(elite);
        while next.len() < pop_size {
            let tournament = |rng: &mut rand_chacha::ChaCha8Rng| {
                let a = rng.random_range(0..pop_size);
                let b = rng.random_range(0..pop_size);
                if pop[a].0 <= pop[b].0 {
                    a
                } else {
                    b
                }
            };
            let pa = tournament(&mut rng);
            let pb = tournament(&mut rng);
            let cut = if n > 1 { rng.random_range(1..n) } else { 0 };
            let mut child: Vec<usize> = pop[pa].1[..cut].iter().chain(&pop[pb].1[cut..]).copied().collect();
            if rng.random::<f64>() < opts.mutation_rate {
                let i = rng.random_range(0..n);
                child[i] = rng.random_range(0..k);
            }
            next.push((labels_objective(d, &child), child));
        }
        pop = next;
    }
    pop.swap_remove(best_of(&pop))
}

/// Genetic-algorithm search over label vectors, restarted from independent
/// random populations; the best restart wins (lowest index on ties).
pub fn block_cluster(d: &DMatrix<f64>, k: usize, opts: &GaOptions) -> Result<ClusterAssignment> {
    check_k(d, k)?;
    let singletons_optimal = k == d.nrows() && d.iter().all(|&v| v >= 0.0);
    if k == 1 || singletons_optimal {
        // Trivial optima: everything together, or all singletons when no
        // entry can lower the sum.
        let labels = if k == 1 { vec![0; d.nrows()] } else { (0..k).collect() };
        return Ok(assignment(d, k, labels));
    }
    let runs = par::map_indexed(opts.restarts.max(1), |r| run_ga(d, k, opts, r));
    let best = par::argmin_by_key(&runs, |r| r.0).expect("at least one restart");
    let labels = runs.into_iter().nth(best).expect("index in range").1;
    Ok(assignment(d, k, labels))
}

/// Exhaustive optimum over all `kᴺ` label vectors (at most 10⁷).
pub fn brute_force_block_cluster(d: &DMatrix<f64>, k: usize) -> Result<ClusterAssignment> {
    check_k(d, k)?;
    let n = d.nrows();
    let total = (k as f64).powi(n as i32);
    if total > 1e7 {
        return Err(Error::TooLarge(format!("{k}^{n} assignments exceed 10^7")));
    }
    let mut labels = vec![0usize; n];
    let mut best = (labels_objective(d, &labels), labels.clone());
    loop {
        // Odometer increment in base k.
        let mut pos = 0;
        while pos < n {
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
        let obj = labels_objective(d, &labels);
        if obj < best.0 {
            best = (obj, labels.clone());
        }
    }
    Ok(assignment(d, k, best.1))
}
