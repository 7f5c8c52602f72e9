//! Smoothness functionals: total variation, Markov variation and their gap.

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::diffusion::{SpectralDecomposition, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, EigenOrder, Matrix, Vector};

/// Eigenvalues of `L` below this count as zero when checking connectivity.
pub const NULL_EIG_TOL: f64 = 1e-10;

/// Absolute slack when deciding whether the gap bound held.
pub const GAP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationNorm {
    L1,
    L2,
}

/// Both smoothness measures of one signal and the gap bound between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationReport {
    pub tv: f64,
    pub mv_l1: f64,
    pub mv_l2: f64,
    /// `|tv - mv_l1|`
    pub gap: f64,
    /// `sqrt(C) sqrt(lambda_2) ||x - proj(x)||`
    pub bound: f64,
    pub holds: bool,
}

fn check_dims(m: &Matrix, x: &Vector) -> Result<()> {
    if m.nrows() != x.len() || m.ncols() != x.len() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: x.len() });
    }
    Ok(())
}

/// `x^T L x`.
pub fn total_variation(l: &Matrix, x: &Vector) -> Result<f64> {
    check_dims(l, x)?;
    Ok(x.dot(&(l * x)))
}

/// `1/2 sum_ij w_ij (x_i - x_j)^2`, equal to [`total_variation`] for `L = D - W`.
pub fn edge_sum_variation(w: &Matrix, x: &Vector) -> Result<f64> {
    check_dims(w, x)?;
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = x[i] - x[j];
            s += w[(i, j)] * d * d;
        }
    }
    Ok(0.5 * s)
}

/// `||x - P x||` in the requested norm.
pub fn markov_variation(p: &TransitionMatrix, x: &Vector, norm: VariationNorm) -> Result<f64> {
    check_dims(p.matrix(), x)?;
    let r = x - p.matrix() * x;
    Ok(match norm {
        VariationNorm::L1 => r.lp_norm(1),
        VariationNorm::L2 => r.norm(),
    })
}

/// `sum_i (1/d_i) |sum_m W_im (x_i - x_m)|`, the l1 variation written edgewise.
pub fn markov_variation_l1_expanded(p: &TransitionMatrix, x: &Vector) -> Result<f64> {
    let w = p.weights();
    check_dims(w, x)?;
    let d = &p.degrees().0;
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        let inner: f64 = (0..n).map(|m| w[(i, m)] * (x[i] - x[m])).sum();
        total += inner.abs() / d[i];
    }
    Ok(total)
}

/// `||x - P x||_1 < threshold`.
pub fn smoothness_test(p: &TransitionMatrix, x: &Vector, threshold: f64) -> Result<bool> {
    if !(threshold > 0.0) {
        return Err(Error::BadParams("smoothness threshold must be positive"));
    }
    Ok(markov_variation(p, x, VariationNorm::L1)? < threshold)
}

/// `max_i |(L x)_i|`, a stand-in for the second-difference bound of `x`.
pub fn smoothness_constant(l: &Matrix, x: &Vector) -> Result<f64> {
    check_dims(l, x)?;
    Ok((l * x).amax())
}

/// Compare `|TV - MV|` against `sqrt(C) sqrt(lambda_2) ||x - proj(x)||`.
///
/// `proj` is the orthogonal projection onto the leading nontrivial right
/// eigenvector of `P`; `lambda_2` is the second-smallest eigenvalue of `L`.
pub fn tv_mv_gap_diagnostic(
    dec: &SpectralDecomposition,
    l: &Matrix,
    p: &TransitionMatrix,
    x: &Vector,
    c: f64,
) -> Result<VariationReport> {
    check_dims(l, x)?;
    if dec.n() != x.len() || dec.n() < 2 {
        return Err(Error::DimensionMismatch { expected: dec.n(), found: x.len() });
    }
    if !(c >= 0.0) {
        return Err(Error::BadParams("smoothness constant must be nonnegative"));
    }
    let spectrum = sym_eigen(l, EigenOrder::Ascending)?.values;
    if dec.unit_multiplicity() > 1 || spectrum[1] <= NULL_EIG_TOL {
        return Err(Error::NotConnected);
    }
    let psi = dec.right.column(1);
    let proj = psi * (psi.dot(x) / psi.norm_squared());
    let residual = (x - proj).norm();
    let tv = total_variation(l, x)?;
    let mv_l1 = markov_variation(p, x, VariationNorm::L1)?;
    let mv_l2 = markov_variation(p, x, VariationNorm::L2)?;
    let gap = (tv - mv_l1).abs();
    let bound = c.sqrt() * spectrum[1].sqrt() * residual;
    Ok(VariationReport { tv, mv_l1, mv_l2, gap, bound, holds: gap <= bound + GAP_SLACK })
}
