//! Graph-recovery metrics: NRMSE on edge weights and relative eigenvalue error.

use alloc::vec::Vec;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, EigenOrder, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReeMode {
    Signed,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    /// Number of eigenvalues compared; `None` means all of them.
    pub k: Option<usize>,
    /// Terms whose reference eigenvalue is smaller in magnitude are skipped.
    pub eig_floor: f64,
    pub ree_mode: ReeMode,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions { k: None, eig_floor: 1e-9, ree_mode: ReeMode::Signed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ree {
    pub value: f64,
    /// Terms dropped by the eigenvalue floor.
    pub skipped: usize,
}

/// Root-mean-square error divided by the range of the reference values.
pub fn nrmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: y_hat.len() });
    }
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    if y.is_empty() || !(hi > lo) {
        return Err(Error::ZeroRange);
    }
    let mse = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
    Ok(mse.sqrt() / (hi - lo))
}

/// `(1/k) sum_{i=2..k} (est_i - ref_i) / ref_i` over magnitude-sorted spectra.
pub fn ree(lambda_true: &[f64], lambda_est: &[f64], opts: &MetricOptions) -> Result<Ree> {
    let n = lambda_true.len();
    let k = opts.k.unwrap_or(n);
    if k < 2 || k > n || lambda_est.len() < k {
        return Err(Error::BadParams("ree needs 2 <= k <= spectrum length"));
    }
    let mut sum = 0.0;
    let mut skipped = 0;
    for i in 1..k {
        let (r, e) = (lambda_true[i], lambda_est[i]);
        if r.abs() < opts.eig_floor {
            skipped += 1;
            continue;
        }
        let term = (e - r) / r;
        sum += match opts.ree_mode {
            ReeMode::Signed => term,
            ReeMode::Absolute => term.abs(),
        };
    }
    if skipped == k - 1 {
        return Err(Error::AllSkipped);
    }
    Ok(Ree { value: sum / k as f64, skipped })
}

/// Strict upper triangle, row by row.
pub fn upper_triangle(w: &Matrix) -> Vec<f64> {
    let n = w.nrows();
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| w[(i, j)]).collect()
}

/// Eigenvalues of `W` with its diagonal removed, sorted by magnitude.
pub fn adjacency_spectrum(w: &Matrix) -> Result<Vec<f64>> {
    let mut a = w.clone();
    a.fill_diagonal(0.0);
    Ok(sym_eigen(&a, EigenOrder::MagnitudeDescending)?.values)
}

/// NRMSE between the edge weights of two graphs.
pub fn weight_nrmse(w_true: &Matrix, w_est: &Matrix) -> Result<f64> {
    nrmse(&upper_triangle(w_true), &upper_triangle(w_est))
}

/// REE between the adjacency spectra of two graphs.
pub fn spectrum_ree(w_true: &Matrix, w_est: &Matrix, opts: &MetricOptions) -> Result<Ree> {
    ree(&adjacency_spectrum(w_true)?, &adjacency_spectrum(w_est)?, opts)
}
