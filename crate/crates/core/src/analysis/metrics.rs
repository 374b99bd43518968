use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::score::upper_triangle;

/// Fails unless `d` is square, symmetric to `1e-9` relative, with zero diagonal.
pub fn check_distance_matrix(d: &DMatrix<f64>) -> Result<()> {
    if d.nrows() != d.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", d.nrows(), d.ncols())));
    }
    let n = d.nrows();
    let scale = d.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(Error::InvalidInput(format!("diagonal entry {i} is {}", d[(i, i)])));
        }
        for j in i + 1..n {
            if (d[(i, j)] - d[(j, i)]).abs() > 1e-9 * scale {
                return Err(Error::InvalidInput(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleReport {
    /// Unordered triples `i < j < k` in which some side exceeds the sum of the other two.
    pub triples: Vec<(usize, usize, usize)>,
    /// Number of entries `D[i,j]` (i < j) that exceed `D[i,k] + D[k,j]` for some `k`.
    pub violating_pairs: usize,
    /// Total number of entries `i < j`.
    pub pairs: usize,
}

impl TriangleReport {
    pub fn count(&self) -> usize {
        self.triples.len()
    }
}

/// Triangle-inequality audit with slack `1e-9 * max entry`.
pub fn triangle_violations(d: &DMatrix<f64>) -> TriangleReport {
    let n = d.nrows();
    let eps = 1e-9 * d.amax();
    let long = |i: usize, j: usize, k: usize| d[(i, j)] > d[(i, k)] + d[(k, j)] + eps;
    let mut bad_pair = vec![false; n * n];
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (ij, ik, jk) = (long(i, j, k), long(i, k, j), long(j, k, i));
                if ij || ik || jk {
                    triples.push((i, j, k));
                }
                bad_pair[i * n + j] |= ij;
                bad_pair[i * n + k] |= ik;
                bad_pair[j * n + k] |= jk;
            }
        }
    }
    TriangleReport {
        triples,
        violating_pairs: bad_pair.iter().filter(|&&b| b).count(),
        pairs: n * n.saturating_sub(1) / 2,
    }
}

/// Euclidean distances between the rows of `points`.
pub fn distances_from_coords(points: &DMatrix<f64>) -> DMatrix<f64> {
    let n = points.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (points.row(i) - points.row(j)).norm();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// `100 ‖d‖ / ‖D‖`.
    pub norm_ratio: f64,
    /// `100 ‖D - d‖ / ‖D‖`.
    pub residual_ratio: f64,
    /// `|‖d‖² + ‖D-d‖² - ‖D‖²| / ‖D‖²`; zero when the residual is orthogonal to `d`.
    pub pythagoras_defect: f64,
}

/// Frobenius-norm comparison over the strict upper triangle.
pub fn quality(data: &DMatrix<f64>, fitted: &DMatrix<f64>) -> Result<QualityReport> {
    if data.shape() != fitted.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", data.shape(), fitted.shape())));
    }
    let a = upper_triangle(data);
    let b = upper_triangle(fitted);
    let nd2: f64 = a.iter().map(|v| v * v).sum();
    if !(nd2 > 0.0) {
        return Err(Error::InvalidInput("data matrix has zero norm".into()));
    }
    let nf2: f64 = b.iter().map(|v| v * v).sum();
    let nr2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(QualityReport {
        norm_ratio: 100.0 * (nf2 / nd2).sqrt(),
        residual_ratio: 100.0 * (nr2 / nd2).sqrt(),
        pythagoras_defect: (nf2 + nr2 - nd2).abs() / nd2,
    })
}

/// Least-squares factor `<D,d>/<d,d>` (upper triangle) and the rescaled `d`.
pub fn least_squares_rescale(data: &DMatrix<f64>, fitted: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    if data.shape() != fitted.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", data.shape(), fitted.shape())));
    }
    let a = upper_triangle(data);
    let b = upper_triangle(fitted);
    let bb: f64 = b.iter().map(|v| v * v).sum();
    if !(bb > 0.0) {
        return Err(Error::InvalidInput("fitted matrix has zero norm".into()));
    }
    let factor = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / bb;
    Ok((factor, fitted * factor))
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = a.len() as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x - ma, y - mb);
        sab += u * v;
        saa += u * u;
        sbb += v * v;
    }
    if !(saa > 0.0) || !(sbb > 0.0) {
        return Err(Error::UndefinedCorrelation("zero variance over the upper triangle".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation between the strict upper triangles of `a` and `b`.
pub fn pearson_r(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    if a.nrows() < 3 {
        return Err(Error::UndefinedCorrelation("fewer than two upper-triangle entries".into()));
    }
    pearson(&upper_triangle(a), &upper_triangle(b))
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue.
pub(crate) fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Centers the points and projects them onto their top `m` principal axes.
pub fn pca_project(points: &DMatrix<f64>, m: usize) -> Result<DMatrix<f64>> {
    let n = points.ncols();
    if m == 0 || m > n {
        return Err(Error::Dimension(format!("cannot project {n}-dimensional points to {m} dimensions")));
    }
    let mean = points.row_mean();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered;
    let (_, axes) = sorted_eigen(cov);
    Ok(centered * axes.columns(0, m))
}
