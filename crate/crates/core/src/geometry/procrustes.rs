//! Rigid-motion fit between two point clouds (Kabsch/Procrustes with reflections allowed).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ImmersionGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceFit {
    /// Orthogonal matrix R (row-major) with b ≈ R a + t.
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    /// Root-mean-square residual after the fit.
    pub rms: f64,
    pub points: usize,
    /// Whether R has determinant −1.
    pub reflection: bool,
    /// The cross-covariance has rank below the dimension, so R is not unique.
    pub degenerate: bool,
}

/// Best orthogonal R and translation t minimizing Σ ‖R a_k + t − b_k‖².
pub fn fit_points(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<CongruenceFit> {
    if a.len() != b.len() {
        return Err(Error::BadCorrespondence(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::GridMismatch("no points to fit".into()));
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|p| p.len() != d) {
        return Err(Error::GridMismatch("points of mixed dimension".into()));
    }
    let n = a.len();
    let pa = DMatrix::from_fn(n, d, |r, c| a[r][c]);
    let pb = DMatrix::from_fn(n, d, |r, c| b[r][c]);
    let ca: DVector<f64> = pa.row_mean().transpose();
    let cb: DVector<f64> = pb.row_mean().transpose();
    let qa = DMatrix::from_fn(n, d, |r, c| pa[(r, c)] - ca[c]);
    let qb = DMatrix::from_fn(n, d, |r, c| pb[(r, c)] - cb[c]);
    let cov = qa.transpose() * &qb;
    let svd = cov.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::NonFinite("SVD of the cross-covariance".into())),
    };
    let rotation = vt.transpose() * u.transpose();
    let translation = &cb - &rotation * &ca;
    let top = svd.singular_values.max();
    let degenerate = svd.singular_values.iter().filter(|s| **s <= 1e-10 * top.max(f64::MIN_POSITIVE)).count() > 1;

    let mut sum = 0.0;
    for k in 0..n {
        let x = DVector::from_column_slice(&a[k]);
        let y = DVector::from_column_slice(&b[k]);
        sum += (&rotation * x + &translation - y).norm_squared();
    }
    Ok(CongruenceFit {
        rotation: (0..d).map(|r| (0..d).map(|c| rotation[(r, c)]).collect()).collect(),
        translation: translation.iter().copied().collect(),
        rms: (sum / n as f64).sqrt(),
        points: n,
        reflection: rotation.determinant() < 0.0,
        degenerate,
    })
}

/// Fits grid `b` to grid `a` using node correspondences (`a` index, `b` index); only
/// pairs where both nodes are ok are used. `None` pairs every node with itself.
pub fn congruence_fit(a: &ImmersionGrid, b: &ImmersionGrid, correspondence: Option<&[(usize, usize)]>) -> Result<CongruenceFit> {
    a.validate()?;
    b.validate()?;
    let identity: Vec<(usize, usize)>;
    let pairs = match correspondence {
        Some(p) => p,
        None => {
            if a.grid.len() != b.grid.len() {
                return Err(Error::BadCorrespondence(a.grid.len(), b.grid.len()));
            }
            identity = (0..a.grid.len()).map(|k| (k, k)).collect();
            &identity
        }
    };
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    for &(i, j) in pairs {
        if i >= a.positions.len() || j >= b.positions.len() {
            return Err(Error::BadCorrespondence(i, j));
        }
        if a.status[i].is_ok() && b.status[j].is_ok() {
            pa.push(a.positions[i].clone());
            pb.push(b.positions[j].clone());
        }
    }
    fit_points(&pa, &pb)
}
