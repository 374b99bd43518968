//! Normalized symmetric-difference dissimilarity between two shapes, minimized
//! over similarity transforms of the mobile shape, and the pairwise matrix
//! built from it.

use std::collections::HashSet;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{apply_transform, overlap, shape_area, shape_centroid, Point, Shape, SimilarityTransform};
use crate::minimize::{minimize, CentralDifference, MinimizeOptions};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    /// Number of initial orientations, evenly spaced over the full turn.
    pub n_starts: usize,
    pub max_iters: usize,
    /// Relative central-difference step.
    pub grad_step: f64,
    /// Relative objective-decrease stop tolerance.
    pub tol: f64,
    /// Curvature pairs kept by the quasi-Newton minimizer.
    pub memory: usize,
    /// Selects the angular phase of the start lattice.
    pub seed: u64,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self { n_starts: 8, max_iters: 200, grad_step: 1e-6, tol: 1e-8, memory: 5, seed: 0 }
    }
}

impl ScoreOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidInput("n_starts must be at least 1".into()));
        }
        if !(self.grad_step > 0.0) || !(self.tol > 0.0) {
            return Err(Error::InvalidInput("grad_step and tol must be positive".into()));
        }
        Ok(())
    }

    fn minimizer(&self) -> MinimizeOptions {
        MinimizeOptions { max_iters: self.max_iters, tol: self.tol, gtol: self.tol, memory: self.memory }
    }

    /// Start angles: `phase + 2πk / n_starts`, with the phase drawn from the seed.
    /// Seed 0 gives phase 0.
    pub fn start_angles(&self) -> Vec<f64> {
        let spacing = TAU / self.n_starts as f64;
        let phase = if self.seed == 0 {
            0.0
        } else {
            ChaCha8Rng::seed_from_u64(self.seed).random::<f64>() * spacing
        };
        (0..self.n_starts).map(|k| phase + spacing * k as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ScoreResult {
    /// Percent in `[0, 100]`.
    pub score: f64,
    pub best_transform: SimilarityTransform,
    pub per_start_scores: Vec<f64>,
    pub evaluations: usize,
}

/// `100 (ΔA + ΔB) / (A + B')` for the mobile shape placed by `t`, where `B'`
/// is the area of the transformed mobile shape.
pub fn objective(fixed: &Shape, mobile: &Shape, t: &SimilarityTransform) -> Result<f64> {
    let placed = apply_transform(mobile, t);
    let ov = overlap(fixed, &placed)?;
    Ok(100.0 * ov.symmetric_difference() / (ov.area_a + ov.area_b))
}

/// Minimizer coordinates: log-scale, angle, and the offset of the mobile
/// centroid from the fixed centroid in units of `sqrt(area(fixed))`. Scale
/// and rotation act about the mobile centroid, which keeps the four
/// coordinates decoupled and of comparable magnitude.
struct Frame {
    fixed_centroid: Point,
    mobile_centroid: Point,
    length: f64,
}

impl Frame {
    fn transform(&self, x: &[f64]) -> SimilarityTransform {
        let (log_scale, angle) = (x[0], x[1]);
        let s = log_scale.exp();
        let (sin, cos) = angle.sin_cos();
        let c = self.mobile_centroid;
        let rc = Point::new(s * (cos * c.x - sin * c.y), s * (sin * c.x + cos * c.y));
        SimilarityTransform {
            log_scale,
            angle,
            tx: self.fixed_centroid.x + self.length * x[2] - rc.x,
            ty: self.fixed_centroid.y + self.length * x[3] - rc.y,
        }
    }
}

/// Dissimilarity of `mobile` relative to `fixed`: the best objective over a
/// multi-start quasi-Newton search of the mobile shape's transform.
pub fn dissimilarity(fixed: &Shape, mobile: &Shape, opts: &ScoreOptions) -> Result<ScoreResult> {
    opts.validate()?;
    let area_fixed = shape_area(fixed)?;
    let area_mobile = shape_area(mobile)?;
    let frame = Frame {
        fixed_centroid: shape_centroid(fixed),
        mobile_centroid: shape_centroid(mobile),
        length: area_fixed.sqrt(),
    };
    let log_scale0 = 0.5 * (area_fixed / area_mobile).ln();
    let mopts = opts.minimizer();

    let angles = opts.start_angles();
    let runs = par::map_slice(&angles, |&angle| {
        let mut obj = CentralDifference::new(
            |x: &[f64]| objective(fixed, mobile, &frame.transform(x)).unwrap_or(f64::NAN),
            opts.grad_step,
        );
        minimize(&mut obj, &[log_scale0, angle, 0.0, 0.0], &mopts)
    });

    let mut per_start_scores = Vec::with_capacity(runs.len());
    let mut evaluations = 0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut first_error = None;
    for run in runs {
        match run {
            Ok(m) => {
                evaluations += m.evaluations;
                per_start_scores.push(m.f);
                if best.as_ref().is_none_or(|(f, _)| m.f < *f) {
                    best = Some((m.f, m.x));
                }
            }
            Err(e) => {
                per_start_scores.push(f64::NAN);
                if let Error::Minimization { evaluations: n, .. } = &e {
                    evaluations += n;
                }
                first_error.get_or_insert(e);
            }
        }
    }
    let Some((f, x)) = best else {
        return Err(Error::Minimization {
            reason: format!(
                "all {} starts failed; first: {}",
                opts.n_starts,
                first_error.map(|e| e.to_string()).unwrap_or_default()
            ),
            best_x: vec![],
            best_f: f64::NAN,
            evaluations,
        });
    };
    Ok(ScoreResult {
        score: f.clamp(0.0, 100.0),
        best_transform: frame.transform(&x),
        per_start_scores,
        evaluations,
    })
}

/// Square, labeled matrix of pairwise scores.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    pub labels: Vec<String>,
    pub entries: DMatrix<f64>,
    /// Largest `|s(A,B) - s(B,A)|` seen before averaging; zero when the
    /// matrix was not computed from shapes.
    pub asymmetry_diag: f64,
}

impl DissimilarityMatrix {
    /// Wraps an existing square matrix; entries must be finite.
    pub fn new(labels: Vec<String>, entries: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::Dimension(format!(
                "{} labels for a {}x{} matrix",
                n,
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
        }
        Ok(Self { labels, entries, asymmetry_diag: 0.0 })
    }

    /// Builds a matrix with labels `0, 1, ...`.
    pub fn unlabeled(entries: DMatrix<f64>) -> Result<Self> {
        let labels = (0..entries.nrows()).map(|i| i.to_string()).collect();
        Self::new(labels, entries)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Fails unless the matrix is symmetric (to `1e-9` relative) with a zero diagonal.
    pub fn check_symmetric_zero_diagonal(&self) -> Result<()> {
        crate::analysis::check_distance_matrix(&self.entries)
    }

    /// Strict upper triangle in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        upper_triangle(&self.entries)
    }
}

pub(crate) fn upper_triangle(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Scores every unordered pair in both directions and stores the mean.
pub fn dissimilarity_matrix(shapes: &[Shape], opts: &ScoreOptions) -> Result<DissimilarityMatrix> {
    opts.validate()?;
    let n = shapes.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("{n} shapes, at least 2 required")));
    }
    let mut seen = HashSet::new();
    for s in shapes {
        if !seen.insert(s.name()) {
            return Err(Error::InvalidInput(format!("duplicate shape name `{}`", s.name())));
        }
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let scored = par::map_slice(&pairs, |&(i, j)| {
        let wrap = |fixed: &Shape, mobile: &Shape| {
            dissimilarity(fixed, mobile, opts).map_err(|e| Error::Pair {
                fixed: fixed.name().to_string(),
                mobile: mobile.name().to_string(),
                source: Box::new(e),
            })
        };
        Ok::<_, Error>((wrap(&shapes[i], &shapes[j])?.score, wrap(&shapes[j], &shapes[i])?.score))
    });

    let mut entries = DMatrix::zeros(n, n);
    let mut asymmetry: f64 = 0.0;
    for (&(i, j), r) in pairs.iter().zip(scored) {
        let (forward, backward) = r?;
        let mean = 0.5 * (forward + backward);
        entries[(i, j)] = mean;
        entries[(j, i)] = mean;
        asymmetry = asymmetry.max((forward - backward).abs());
    }
    Ok(DissimilarityMatrix {
        labels: shapes.iter().map(|s| s.name().to_string()).collect(),
        entries,
        asymmetry_diag: asymmetry,
    })
}
