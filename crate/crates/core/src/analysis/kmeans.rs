//! Lloyd's K-means with k-means++ seeding.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterAssignment;
use crate::error::{Error, Result};

const MAX_ITERS: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// `objective` is the final within-cluster sum of squares; centroids are
    /// the members nearest to each mean.
    pub assignment: ClusterAssignment,
    pub means: DMatrix<f64>,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, means: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols()).map(|a| (points[(i, a)] - means[(c, a)]).powi(2)).sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, means: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..means.nrows() {
        let v = sq_dist(points, i, means, c);
        if v < best.1 {
            best = (c, v);
        }
    }
    best
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = vec![f64::INFINITY; n];
    while chosen.len() < k {
        let last = *chosen.last().unwrap();
        for (i, di) in d2.iter_mut().enumerate() {
            let v: f64 = (0..points.ncols()).map(|a| (points[(i, a)] - points[(last, a)]).powi(2)).sum();
            *di = di.min(v);
        }
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &v) in d2.iter().enumerate() {
                if v > 0.0 && target < v {
                    pick = i;
                    break;
                }
                target -= v;
            }
            pick
        } else {
            // All remaining points coincide with a chosen center.
            rng.random_range(0..n)
        };
        chosen.push(next);
    }
    DMatrix::from_fn(k, points.ncols(), |c, a| points[(chosen[c], a)])
}

pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={n}")));
    }
    let dim = points.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, v) = nearest(points, i, &means);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            dists[i] = v;
        }
        // Repair empty clusters with the point farthest from its mean.
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&c| counts[c] += 1);
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("k <= n leaves a donor cluster");
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                dists[far] = 0.0;
                for a in 0..dim {
                    means[(c, a)] = points[(far, a)];
                }
                changed = true;
            }
        }
        history.push(dists.iter().sum());

        if !changed || iterations >= MAX_ITERS {
            break;
        }
        iterations += 1;
        means.fill(0.0);
        for i in 0..n {
            for a in 0..dim {
                means[(labels[i], a)] += points[(i, a)];
            }
        }
        for c in 0..k {
            for a in 0..dim {
                means[(c, a)] /= counts[c] as f64;
            }
        }
    }

    let wcss: f64 = (0..n).map(|i| sq_dist(points, i, &means, labels[i])).sum();
    let centroid_index = (0..k)
        .map(|c| {
            (0..n)
                .filter(|&i| labels[i] == c)
                .min_by(|&a, &b| sq_dist(points, a, &means, c).total_cmp(&sq_dist(points, b, &means, c)))
        })
        .collect();
    Ok(KMeansResult {
        assignment: ClusterAssignment { k, labels, centroid_index, objective: wcss },
        means,
        wcss_history: history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_n_gives_singletons() {
        let pts = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 5.0, 5.0, 9.0, 1.0]);
        let r = kmeans(&pts, 4, 3).unwrap();
        assert_eq!(r.assignment.effective_k(), 4);
        assert!(r.assignment.objective.abs() < 1e-12);
    }

    #[test]
    fn identical_points() {
        let pts = DMatrix::from_element(5, 2, 2.5);
        let r = kmeans(&pts, 2, 1).unwrap();
        assert_eq!(r.assignment.objective, 0.0);
        assert_eq!(r.assignment.labels.len(), 5);
    }

    #[test]
    fn rejects_bad_k() {
        let pts = DMatrix::from_element(3, 2, 0.0);
        assert!(kmeans(&pts, 0, 0).is_err());
        assert!(kmeans(&pts, 4, 0).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let pts = DMatrix::from_fn(20, 2, |i, a| ((i * 7 + a * 3) % 11) as f64);
        let a = kmeans(&pts, 3, 42).unwrap();
        let b = kmeans(&pts, 3, 42).unwrap();
        assert_eq!(a.assignment, b.assignment);
    }
}
