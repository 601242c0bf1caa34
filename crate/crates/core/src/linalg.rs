//! Dense complex linear algebra helpers shared by all modules.
//!
//! Everything is built on `nalgebra`'s dynamically sized complex matrices.
//! Hermitian spectra go through the symmetric eigensolver (matrices are
//! symmetrized first to suppress roundoff), general spectra through the
//! complex Schur form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// (m + m†)/2.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
///
/// The input is symmetrized before solving, so slightly non-Hermitian
/// inputs are tolerated.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let se = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    herm_eigen(m).0
}

/// Minimum eigenvalue of a Hermitian matrix; 0 for the empty matrix.
pub fn herm_min_eig(m: &CMat) -> f64 {
    herm_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn herm_max_eig(m: &CMat) -> f64 {
    herm_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn general_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)]]),
        _ => {
            let schur = m
                .clone()
                .try_schur(1e-12, 100_000)
                .ok_or(Error::EigenFailed)?;
            let (_, t) = schur.unpack();
            Ok(t.diagonal().iter().copied().collect())
        }
    }
}

/// Largest singular value; 0 for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the numerical kernel of a PSD Hermitian matrix.
///
/// Eigenvalues `<= tol * (lambda_max + 1)` are treated as zero.
pub fn psd_kernel(g: &CMat, tol: f64) -> Vec<CVec> {
    let (vals, vecs) = herm_eigen(g);
    if vals.is_empty() {
        return Vec::new();
    }
    let lambda_max = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol * (lambda_max + 1.0);
    vals.iter()
        .enumerate()
        .filter(|(_, &v)| v <= cutoff)
        .map(|(k, _)| vecs.column(k).into_owned())
        .collect()
}

/// Pseudo-inverse square root of a PSD Hermitian matrix.
pub fn psd_inv_sqrt(m: &CMat, tol: f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let n = m.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let lambda_max = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol * (lambda_max + 1.0);
    let diag = CVec::from_iterator(
        n,
        vals.iter()
            .map(|&v| if v > cutoff { cr(1.0 / v.sqrt()) } else { cr(0.0) }),
    );
    &vecs * CMat::from_diagonal(&diag) * vecs.adjoint()
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CVec) -> Result<CVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Invalid("singular linear system".into()))
}
