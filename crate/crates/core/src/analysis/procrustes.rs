use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Least-squares 2D similarity (optionally with reflection) mapping a point
/// set onto anchors.
#[derive(Debug, Clone)]
pub struct SimilarityFit {
    pub scale: f64,
    pub angle: f64,
    pub reflected: bool,
    pub translation: [f64; 2],
    pub aligned: DMatrix<f64>,
    /// Root-mean-square distance between aligned points and anchors.
    pub rms: f64,
}

/// Treats rows as complex numbers: the optimum of `Σ|z p_i + t - q_i|²` over
/// complex `z` and `t` is `z = Σ conj(p'_i) q'_i / Σ|p'_i|²` on centered data.
pub fn fit_similarity_2d(points: &DMatrix<f64>, anchors: &DMatrix<f64>, allow_reflection: bool) -> Result<SimilarityFit> {
    if points.ncols() != 2 || anchors.ncols() != 2 || points.nrows() != anchors.nrows() {
        return Err(Error::Dimension(format!(
            "need matching N x 2 point sets, got {:?} and {:?}",
            points.shape(),
            anchors.shape()
        )));
    }
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InvalidInput("at least two anchor points are required".into()));
    }
    let pm = points.row_mean();
    let qm = anchors.row_mean();

    let fit = |reflect: bool| -> Option<SimilarityFit> {
        let (mut re, mut im, mut pp) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let px = points[(i, 0)] - pm[0];
            let py = if reflect { -(points[(i, 1)] - pm[1]) } else { points[(i, 1)] - pm[1] };
            let (qx, qy) = (anchors[(i, 0)] - qm[0], anchors[(i, 1)] - qm[1]);
            re += px * qx + py * qy;
            im += px * qy - py * qx;
            pp += px * px + py * py;
        }
        if !(pp > 0.0) {
            return None;
        }
        let (zr, zi) = (re / pp, im / pp);
        let mut aligned = DMatrix::zeros(n, 2);
        let mut ss = 0.0;
        for i in 0..n {
            let px = points[(i, 0)] - pm[0];
            let py = if reflect { -(points[(i, 1)] - pm[1]) } else { points[(i, 1)] - pm[1] };
            aligned[(i, 0)] = zr * px - zi * py + qm[0];
            aligned[(i, 1)] = zi * px + zr * py + qm[1];
            ss += (aligned[(i, 0)] - anchors[(i, 0)]).powi(2) + (aligned[(i, 1)] - anchors[(i, 1)]).powi(2);
        }
        let scale = zr.hypot(zi);
        let angle = zi.atan2(zr);
        // Translation of the raw (unreflected, uncentered) input.
        let (sx, sy) = (pm[0], if reflect { -pm[1] } else { pm[1] });
        Some(SimilarityFit {
            scale,
            angle,
            reflected: reflect,
            translation: [qm[0] - (zr * sx - zi * sy), qm[1] - (zi * sx + zr * sy)],
            aligned,
            rms: (ss / n as f64).sqrt(),
        })
    };

    let direct = fit(false).ok_or_else(|| Error::InvalidInput("points are all identical".into()))?;
    if allow_reflection {
        if let Some(mirrored) = fit(true) {
            if mirrored.rms < direct.rms {
                return Ok(mirrored);
            }
        }
    }
    Ok(direct)
}
