//! Dense linear-algebra helpers shared by the spectral modules.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Eigen-pairs of a real symmetric matrix; `vectors` holds them as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Ordering applied to a symmetric eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenOrder {
    Ascending,
    Descending,
    /// |lambda| descending, ties broken by value descending.
    MagnitudeDescending,
}

/// Symmetric eigensolve with deterministic ordering and sign convention.
///
/// Only the lower triangle of `m` is read.
pub fn sym_eigen(m: &Matrix, order: EigenOrder) -> Result<SymEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::NumericalFailure)?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let vals = &eig.eigenvalues;
    match order {
        EigenOrder::Ascending => idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b])),
        EigenOrder::Descending => idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a])),
        EigenOrder::MagnitudeDescending => {
            idx.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()).then(vals[b].total_cmp(&vals[a])))
        }
    }
    let values = idx.iter().map(|&i| vals[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in idx.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    for j in 0..n {
        let flip = pivot_sign(vectors.column(j).iter().copied()) < 0.0;
        if flip {
            vectors.column_mut(j).neg_mut();
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Sign of the first largest-magnitude entry.
pub(crate) fn pivot_sign(col: impl Iterator<Item = f64>) -> f64 {
    let mut best = 0.0_f64;
    for v in col {
        if v.abs() > best.abs() {
            best = v;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Mirror the upper triangle onto the lower one so the result is exactly symmetric.
pub(crate) fn symmetrize_average(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `p^t` by repeated multiplication (`t = 0` gives the identity).
pub(crate) fn matrix_power(p: &Matrix, t: u32) -> Matrix {
    let mut out = Matrix::identity(p.nrows(), p.ncols());
    for _ in 0..t {
        out = &out * p;
    }
    out
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
