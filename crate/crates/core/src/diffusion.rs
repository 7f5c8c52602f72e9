//! Diffusion maps: kernel affinities, bandwidth selection, the random-walk
//! matrix and its spectral decomposition.
//!
//! The eigenproblem is always solved on the symmetric conjugate
//! `P_sym = D^{1/2} P D^{-1/2}`, which has the same spectrum as `P`. For each
//! orthonormal eigenvector `v` of `P_sym` the right eigenvector of `P` is
//! `psi = D^{-1/2} v` and the left eigenvector is `phi = D^{1/2} v`, so the two
//! families are biorthonormal by construction.

use alloc::vec::Vec;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{DegreeVector, Graph};
use crate::linalg::{pivot_sign, sym_eigen, EigenOrder, Matrix, Vector};

/// Tolerance on `1 - lambda` separating a repeated unit eigenvalue from the rest.
pub const ERGODIC_GAP_TOL: f64 = 1e-10;

/// Gaussian kernel `k(x, y) = exp(-|x - y|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    sigma: f64,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(KernelSpec { sigma })
        } else {
            Err(Error::BadParams("kernel bandwidth must be positive and finite"))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Squared Euclidean distances between the rows of `x`.
pub fn pairwise_sq_distances(x: &Matrix) -> Matrix {
    let n = x.nrows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (x.row(i) - x.row(j)).norm_squared();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Kernel weights from squared distances; the diagonal is zeroed.
pub fn gaussian_affinity(sq_dist: &Matrix, kernel: &KernelSpec) -> Matrix {
    let denom = 2.0 * kernel.sigma * kernel.sigma;
    let n = sq_dist.nrows();
    Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (-sq_dist[(i, j)] / denom).exp() })
}

/// `scale` times the median of the pairwise (non-squared) distances.
pub fn median_bandwidth(x: &Matrix, scale: f64) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::BadParams("scale must be positive"));
    }
    let d = pairwise_sq_distances(x);
    let mut dists: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(d[(i, j)].sqrt());
        }
    }
    if dists.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateData);
    }
    Ok(scale * crate::linalg::median(&mut dists))
}

/// Result of the log-log slope scan over `epsilon = 2^k`, `k = -40..=40`.
#[derive(Debug, Clone, PartialEq)]
pub struct BghEstimate {
    pub epsilon: f64,
    pub intrinsic_dim: i64,
    pub max_slope: f64,
    /// Set when the slope peaks at either end of the scan, i.e. no interior maximum.
    pub at_boundary: bool,
}

pub const BGH_EXPONENTS: core::ops::RangeInclusive<i32> = -40..=40;

/// `log T(eps)` with `T(eps) = sum_ij exp(-D_ij / (4 eps))`, evaluated with a max shift.
pub fn bgh_log_sum(sq_dist: &Matrix, eps: f64) -> f64 {
    let shift = sq_dist.iter().map(|d| -d / (4.0 * eps)).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = sq_dist.iter().map(|d| (-d / (4.0 * eps) - shift).exp()).sum();
    shift + s.ln()
}

/// Bandwidth scan: picks the epsilon where `d log T / d log eps` is largest.
pub fn bgh_bandwidth(sq_dist: &Matrix) -> Result<BghEstimate> {
    let n = sq_dist.nrows();
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    let log_eps: Vec<f64> = BGH_EXPONENTS.map(|k| (k as f64) * core::f64::consts::LN_2).collect();
    let log_t: Vec<f64> = log_eps.iter().map(|&le| bgh_log_sum(sq_dist, le.exp())).collect();
    let slopes: Vec<f64> =
        (0..log_eps.len() - 1).map(|i| (log_t[i + 1] - log_t[i]) / (log_eps[i + 1] - log_eps[i])).collect();
    let mut best = 0;
    for (i, &s) in slopes.iter().enumerate() {
        if s > slopes[best] {
            best = i;
        }
    }
    let max_slope = slopes[best];
    Ok(BghEstimate {
        epsilon: log_eps[best].exp(),
        intrinsic_dim: (2.0 * max_slope).round() as i64,
        max_slope,
        at_boundary: best == 0 || best == slopes.len() - 1,
    })
}

/// Row-stochastic random-walk matrix `P = D^{-1} W`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: Matrix,
    degrees: DegreeVector,
    weights: Matrix,
}

impl TransitionMatrix {
    pub fn from_graph(g: &Graph) -> Result<Self> {
        markov_matrix(g.weights())
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    /// The weight matrix `P` was normalized from.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// `D^{-1/2} W D^{-1/2}`, exactly symmetric when `W` is.
    pub fn symmetric_conjugate(&self) -> Matrix {
        let d = &self.degrees.0;
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| self.weights[(i, j)] / (d[i] * d[j]).sqrt())
    }
}

/// Normalize the rows of a nonnegative weight matrix.
pub fn markov_matrix(w: &Matrix) -> Result<TransitionMatrix> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.ncols() });
    }
    let degrees = DegreeVector(w.row_iter().map(|r| r.sum()).collect());
    degrees.require_positive()?;
    let p = Matrix::from_fn(n, n, |i, j| w[(i, j)] / degrees.0[i]);
    Ok(TransitionMatrix { p, degrees, weights: w.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Markov,
}

/// Eigenvalues of `P` (|lambda| descending) with biorthonormal right/left eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Right eigenvectors `psi` as columns.
    pub right: Matrix,
    /// Left eigenvectors `phi` as columns; `left^T right = I`.
    pub left: Matrix,
    pub source: SpectrumSource,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues within [`ERGODIC_GAP_TOL`] of 1, i.e. connected components.
    pub fn unit_multiplicity(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l >= 1.0 - ERGODIC_GAP_TOL).count()
    }
}

/// Eigendecompose `P` through its symmetric conjugate.
pub fn decompose(p: &TransitionMatrix) -> Result<SpectralDecomposition> {
    let n = p.n();
    let eig = sym_eigen(&p.symmetric_conjugate(), EigenOrder::MagnitudeDescending)?;
    let sqrt_d: Vec<f64> = p.degrees.0.iter().map(|d| d.sqrt()).collect();
    let mut right = Matrix::zeros(n, n);
    let mut left = Matrix::zeros(n, n);
    for j in 0..n {
        let v = eig.vectors.column(j);
        let sign = pivot_sign((0..n).map(|i| v[i] / sqrt_d[i]));
        for i in 0..n {
            right[(i, j)] = sign * v[i] / sqrt_d[i];
            left[(i, j)] = sign * v[i] * sqrt_d[i];
        }
    }
    Ok(SpectralDecomposition { eigenvalues: eig.values, right, left, source: SpectrumSource::Markov })
}

/// Time-scaled diffusion coordinates; column `j - 1` is `lambda_j^t psi_j`, `j = 1..=l`.
#[derive(Debug, Clone)]
pub struct DiffusionMapEmbedding {
    pub coords: Matrix,
    pub t: f64,
    pub l: usize,
    /// A negative eigenvalue was raised to a non-integer power as `sign * |lambda|^t`.
    pub non_integer_power_of_negative: bool,
}

/// `lambda^t`, exact for integer `t`; otherwise `sign(lambda) |lambda|^t`.
pub fn eigen_power(lambda: f64, t: f64) -> (f64, bool) {
    if t.fract() == 0.0 && t.abs() <= i32::MAX as f64 {
        (lambda.powi(t as i32), false)
    } else if lambda < 0.0 {
        (-(-lambda).powf(t), true)
    } else {
        (lambda.powf(t), false)
    }
}

pub fn embedding(dec: &SpectralDecomposition, t: f64, l: usize) -> Result<DiffusionMapEmbedding> {
    let n = dec.n();
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::BadParams("diffusion time must be nonnegative"));
    }
    if l == 0 || l + 1 > n {
        return Err(Error::BadTruncation { l, max: n.saturating_sub(1) });
    }
    let mut flagged = false;
    let mut coords = Matrix::zeros(n, l);
    for j in 1..=l {
        let (scale, flag) = eigen_power(dec.eigenvalues[j], t);
        flagged |= flag;
        coords.set_column(j - 1, &(dec.right.column(j) * scale));
    }
    Ok(DiffusionMapEmbedding { coords, t, l, non_integer_power_of_negative: flagged })
}

/// Euclidean distance between two embedded nodes.
pub fn diffusion_distance(emb: &DiffusionMapEmbedding, i: usize, j: usize) -> Result<f64> {
    let n = emb.coords.nrows();
    for k in [i, j] {
        if k >= n {
            return Err(Error::NodeOutOfRange(k));
        }
    }
    Ok((emb.coords.row(i) - emb.coords.row(j)).norm())
}

/// Left eigenvector of the unit eigenvalue, normalized to sum 1.
///
/// Requires the unit eigenvalue to be simple (a connected graph). Bipartite
/// graphs are accepted: their stationary distribution is still unique even
/// though the walk does not converge to it.
pub fn stationary_distribution(dec: &SpectralDecomposition) -> Result<Vector> {
    if dec.n() >= 2 && dec.eigenvalues[1] >= 1.0 - ERGODIC_GAP_TOL {
        return Err(Error::NotErgodic(dec.eigenvalues[1]));
    }
    let phi = dec.left.column(0);
    let total = phi.sum();
    Ok(phi / total)
}
