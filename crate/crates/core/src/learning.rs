//! Covariance prefiltering and graph-structure estimators.

use alloc::vec::Vec;

use nalgebra::Cholesky;
// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::gso::{build_gso, FilterSpec, GsoKind};
use crate::linalg::{sym_eigen, symmetrize_average, EigenOrder, Matrix, Vector};

/// Relative slack on the smallest covariance eigenvalue before it is rejected.
pub const PSD_TOL: f64 = 1e-10;

/// Row-sum residual at which the doubly-stochastic projection stops early.
pub const PROJECTION_TOL: f64 = 1e-13;

/// Steps below this size count as no progress.
pub const MIN_STEP: f64 = 1e-20;

/// Sample covariance of `m` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    pub sigma: Matrix,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnOptions {
    pub max_iters: usize,
    /// Stop once `|F_k - F_{k-1}| <= tol (1 + |F_k|)`.
    pub tol: f64,
    /// Initial step; doubled after an accepted step, halved after a rejected one.
    pub step: f64,
    /// Row/column sweeps per projection.
    pub projection_iters: usize,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions { max_iters: 2000, tol: 1e-8, step: 1e-2, projection_iters: 50 }
    }
}

impl LearnOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.step > 0.0 && self.projection_iters > 0) {
            return Err(Error::BadParams("learn options must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    /// Symmetric nonnegative weights.
    pub w_est: Matrix,
    /// Objective after every accepted step, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Constraint residual of `w_est`.
    pub constraint_violation: f64,
    /// Constraint residual of the last iterate before symmetrization.
    pub raw_violation: f64,
}

impl LearnResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }
}

/// Mean-centered covariance of the rows of `x` (observations x nodes).
pub fn sample_covariance(x: &Matrix) -> Result<SampleCovariance> {
    let m = x.nrows();
    if m < 2 {
        return Err(Error::TooFewObservations(m));
    }
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let sigma = centered.transpose() * &centered / (m - 1) as f64;
    Ok(SampleCovariance { sigma: symmetrize_average(&sigma), m })
}

fn require_psd(sigma: &Matrix) -> Result<()> {
    let values = sym_eigen(sigma, EigenOrder::Ascending)?.values;
    let scale = values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let lo = values.first().copied().unwrap_or(0.0);
    if lo < -PSD_TOL * scale {
        return Err(Error::NotPsd(lo));
    }
    Ok(())
}

/// Filter the covariance's own spectrum: `Q diag(lambda h(lambda)) Q^T`.
///
/// Components are indexed in descending eigenvalue order, so an ideal filter
/// keeps the leading principal directions.
pub fn prefilter_covariance(s: &SampleCovariance, f: &FilterSpec) -> Result<SampleCovariance> {
    f.validate()?;
    let e = sym_eigen(&s.sigma, EigenOrder::Descending)?;
    let mut scaled = e.vectors.clone();
    for (k, &lambda) in e.values.iter().enumerate() {
        let h = f.response(lambda, k)?;
        scaled.column_mut(k).scale_mut(lambda * h);
    }
    let sigma = scaled * e.vectors.transpose();
    Ok(SampleCovariance { sigma: symmetrize_average(&sigma), m: s.m })
}

fn inverse_row_sums(w: &Matrix) -> Vec<f64> {
    w.row_iter()
        .map(|r| {
            let s = r.sum();
            if s == 0.0 {
                0.0
            } else {
                1.0 / s
            }
        })
        .collect()
}

/// `||Sigma - D(W)^+ W Sigma W^T||_F^2`.
pub fn markov_objective(sigma: &Matrix, w: &Matrix) -> f64 {
    residual(sigma, w).0.norm_squared()
}

fn residual(sigma: &Matrix, w: &Matrix) -> (Matrix, Matrix, Vec<f64>) {
    let a = inverse_row_sums(w);
    let m = w * sigma * w.transpose();
    let mut r = sigma.clone();
    for i in 0..r.nrows() {
        for k in 0..r.ncols() {
            r[(i, k)] -= a[i] * m[(i, k)];
        }
    }
    (r, m, a)
}

/// Analytic gradient of [`markov_objective`] with respect to `W`.
pub fn markov_gradient(sigma: &Matrix, w: &Matrix) -> Matrix {
    let (r, m, a) = residual(sigma, w);
    let n = w.nrows();
    let mut b = r.clone();
    for i in 0..n {
        b.row_mut(i).scale_mut(a[i]);
    }
    let c: Vec<f64> = (0..n).map(|i| r.row(i).dot(&m.row(i))).collect();
    let mut g = (&b + b.transpose()) * w * sigma;
    for i in 0..n {
        let shift = a[i] * a[i] * c[i];
        for j in 0..n {
            g[(i, j)] = -2.0 * (g[(i, j)] - shift);
        }
    }
    g
}

/// Largest violation of nonnegativity and unit row/column sums.
pub fn doubly_stochastic_violation(w: &Matrix) -> f64 {
    let rows = w.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let cols = w.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max);
    let neg = w.iter().fold(0.0_f64, |a, &v| a.max(-v));
    rows.max(cols).max(neg)
}

/// Shift `u` with `sum_j max(a_j + u, 0) = 1`; `scratch` is reused for sorting.
fn simplex_shift(a: impl Iterator<Item = f64>, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(a);
    scratch.sort_by(|x, y| y.total_cmp(x));
    let mut prefix = 0.0;
    let mut shift = 0.0;
    for (k, &v) in scratch.iter().enumerate() {
        prefix += v;
        let cand = (1.0 - prefix) / (k + 1) as f64;
        if v + cand > 0.0 {
            shift = cand;
        } else {
            break;
        }
    }
    shift
}

/// Euclidean projection onto nonnegative doubly-stochastic matrices.
///
/// The projection is `max(X + u 1^T + 1 v^T, 0)` for dual shifts `u`, `v`;
/// these are found by exact block-coordinate ascent over rows and columns,
/// for at most `sweeps` sweeps or until the row sums are within
/// [`PROJECTION_TOL`]. Column sums are exact on return.
pub fn project_doubly_stochastic(x: &Matrix, sweeps: usize) -> Matrix {
    let n = x.nrows();
    let mut u = alloc::vec![0.0; n];
    let mut v = alloc::vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    for _ in 0..sweeps.max(1) {
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = simplex_shift((0..n).map(|j| x[(i, j)] + v[j]), &mut scratch);
        }
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = simplex_shift((0..n).map(|i| x[(i, j)] + u[i]), &mut scratch);
        }
        let row_err = (0..n)
            .map(|i| ((0..n).map(|j| (x[(i, j)] + u[i] + v[j]).max(0.0)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        if row_err <= PROJECTION_TOL {
            break;
        }
    }
    Matrix::from_fn(n, n, |i, j| (x[(i, j)] + u[i] + v[j]).max(0.0))
}

struct Descent {
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Adaptive-step descent shared by both estimators.
///
/// `propose(x, step)` returns the candidate point and its objective, or
/// `None` when the step leaves the feasible domain.
fn descend<P>(
    x: &mut P,
    f0: f64,
    opts: &LearnOptions,
    mut propose: impl FnMut(&P, f64) -> Option<(P, f64)>,
) -> Descent {
    let mut trace = alloc::vec![f0];
    let mut f = f0;
    let mut step = opts.step;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        match propose(x, step) {
            Some((cand, fc)) if fc <= f => {
                let delta = f - fc;
                *x = cand;
                f = fc;
                trace.push(f);
                step *= 2.0;
                if delta <= opts.tol * (1.0 + f.abs()) {
                    converged = true;
                    break;
                }
            }
            _ => {
                step *= 0.5;
                if step < MIN_STEP {
                    break;
                }
            }
        }
    }
    Descent { trace, iterations, converged }
}

/// Markov-variation graph learning by projected gradient descent.
///
/// Minimizes `||Sigma - D(W)^+ W Sigma W^T||_F^2` over nonnegative doubly
/// stochastic `W`, starting from the projection of `0.5 * ones`, and returns
/// the symmetrized final iterate.
pub fn min_markov_var(s: &SampleCovariance, opts: &LearnOptions) -> Result<LearnResult> {
    opts.validate()?;
    let n = s.sigma.nrows();
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    require_psd(&s.sigma)?;
    let sigma = &s.sigma;
    let mut w = project_doubly_stochastic(&Matrix::from_element(n, n, 0.5), opts.projection_iters);
    let f0 = markov_objective(sigma, &w);
    let run = descend(&mut w, f0, opts, |w, step| {
        let g = markov_gradient(sigma, w);
        let cand = project_doubly_stochastic(&(w - g * step), opts.projection_iters);
        let fc = markov_objective(sigma, &cand);
        fc.is_finite().then_some((cand, fc))
    });
    let raw_violation = doubly_stochastic_violation(&w);
    let w_est = symmetrize_average(&w);
    Ok(LearnResult {
        constraint_violation: doubly_stochastic_violation(&w_est),
        w_est,
        objective_trace: run.trace,
        iterations: run.iterations,
        converged: run.converged,
        raw_violation,
    })
}

/// Upper-triangular edge weights `w_ij`, `i < j`.
fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn laplacian_of(n: usize, idx: &[(usize, usize)], w: &[f64]) -> Matrix {
    let mut l = Matrix::zeros(n, n);
    for (&(i, j), &v) in idx.iter().zip(w) {
        l[(i, j)] -= v;
        l[(j, i)] -= v;
        l[(i, i)] += v;
        l[(j, j)] += v;
    }
    l
}

struct TvState {
    w: Vec<f64>,
    /// `(L + J)^{-1}`
    k: Matrix,
}

fn tv_eval(sigma: &Matrix, alpha: f64, idx: &[(usize, usize)], w: Vec<f64>) -> Option<(TvState, f64)> {
    let n = sigma.nrows();
    let l = laplacian_of(n, idx, &w);
    let reg = &l + Matrix::from_element(n, n, 1.0 / n as f64);
    let chol = Cholesky::new(reg)?;
    let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let trace = (sigma * &l).trace();
    let penalty = 2.0 * alpha * w.iter().sum::<f64>();
    let f = trace - logdet + penalty;
    f.is_finite().then(|| (TvState { w, k: chol.inverse() }, f))
}

/// Graph learning by total-variation minimization with a log-det barrier.
///
/// Minimizes `tr(Sigma L) - log det(L + 11^T/n) + alpha ||offdiag L||_1` over
/// combinatorial Laplacians, starting from the complete graph with unit weights.
pub fn min_total_var(s: &SampleCovariance, alpha: f64, opts: &LearnOptions) -> Result<LearnResult> {
    opts.validate()?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::BadParams("alpha must be nonnegative"));
    }
    let n = s.sigma.nrows();
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    require_psd(&s.sigma)?;
    let sigma = &s.sigma;
    let idx = pairs(n);
    let (mut state, f0) = tv_eval(sigma, alpha, &idx, alloc::vec![1.0; idx.len()]).ok_or(Error::NumericalFailure)?;
    let run = descend(&mut state, f0, opts, |st, step| {
        let w: Vec<f64> = idx
            .iter()
            .zip(&st.w)
            .map(|(&(i, j), &v)| {
                let data = sigma[(i, i)] + sigma[(j, j)] - 2.0 * sigma[(i, j)];
                let barrier = st.k[(i, i)] + st.k[(j, j)] - 2.0 * st.k[(i, j)];
                (v - step * (data + 2.0 * alpha - barrier)).max(0.0)
            })
            .collect();
        tv_eval(sigma, alpha, &idx, w)
    });
    let mut w_est = Matrix::zeros(n, n);
    for (&(i, j), &v) in idx.iter().zip(&state.w) {
        w_est[(i, j)] = v;
        w_est[(j, i)] = v;
    }
    let l = laplacian_of(n, &idx, &state.w);
    let violation = (l * Vector::from_element(n, 1.0)).amax();
    Ok(LearnResult {
        w_est,
        objective_trace: run.trace,
        iterations: run.iterations,
        converged: run.converged,
        constraint_violation: violation,
        raw_violation: violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnMethod {
    MarkovVariation,
    TotalVariation { alpha: f64 },
}

/// Filter-then-learn configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub gso: GsoKind,
    pub filter: FilterSpec,
    /// Number of times the filter is applied, i.e. the response is `h^order`.
    pub filter_order: u32,
    pub method: LearnMethod,
}

/// Filter every signal in the GSO's Fourier basis, then learn from the covariance.
///
/// `x` holds one signal per row. When every filter gain is exactly 1 the
/// signals are passed through untouched.
pub fn learn_pipeline(x: &Matrix, g_hint: &Graph, pipeline: &Pipeline, opts: &LearnOptions) -> Result<LearnResult> {
    if x.ncols() != g_hint.n() {
        return Err(Error::DimensionMismatch { expected: g_hint.n(), found: x.ncols() });
    }
    g_hint.require_connected()?;
    let s = build_gso(g_hint, pipeline.gso)?;
    let gains = s.gains(&pipeline.filter, pipeline.filter_order)?;
    let cov = if gains.iter().all(|&g| g == 1.0) {
        sample_covariance(x)?
    } else {
        let h = s.filter_operator(&pipeline.filter, pipeline.filter_order)?;
        sample_covariance(&(x * h.transpose()))?
    };
    match pipeline.method {
        LearnMethod::MarkovVariation => min_markov_var(&cov, opts),
        LearnMethod::TotalVariation { alpha } => min_total_var(&cov, alpha, opts),
    }
}
