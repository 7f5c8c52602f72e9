//! Graph shift operators, graph Fourier transforms and spectral filters.

use alloc::vec::Vec;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diffusion::{decompose, eigen_power, TransitionMatrix};
use crate::error::{Error, Result};
use crate::graph::{laplacian, Graph, LaplacianKind};
use crate::linalg::{matrix_power, max_abs, spectral_norm, sym_eigen, EigenOrder, Matrix, Vector};

/// Allowed deviation of `vectors * inverse` from the identity.
pub const BASIS_TOL: f64 = 1e-8;

/// Smallest admissible `|1 +- tau * lambda|` before a Tikhonov response is a pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DmMode {
    /// Rank-`l` resynthesis `sum_{j=1..l} lambda_j^t psi_j phi_j^T`.
    TruncatedSpectral,
    /// `I - P^t`.
    IdentityMinusPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GsoKind {
    Adjacency,
    /// Combinatorial Laplacian `D - W`.
    Laplacian,
    Markov,
    DiffusionMap {
        t: u32,
        l: usize,
        mode: DmMode,
    },
    /// Caller-supplied matrix and basis, see [`ShiftOperator::custom`].
    Custom,
}

/// Eigenvector basis of a shift operator.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    /// Eigenvectors as columns.
    pub vectors: Matrix,
    /// `vectors^{-1}`; the transpose when the basis is orthonormal.
    pub inverse: Matrix,
    pub eigenvalues: Vec<f64>,
    pub orthonormal: bool,
}

impl FourierBasis {
    pub fn new(vectors: Matrix, inverse: Matrix, eigenvalues: Vec<f64>, orthonormal: bool) -> Result<Self> {
        let n = vectors.nrows();
        if vectors.ncols() != n || inverse.shape() != (n, n) || eigenvalues.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: eigenvalues.len() });
        }
        let residual = max_abs(&(&vectors * &inverse - Matrix::identity(n, n)));
        if !(residual <= BASIS_TOL) {
            return Err(Error::NumericalFailure);
        }
        Ok(FourierBasis { vectors, inverse, eigenvalues, orthonormal })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    fn orthonormal_from(values: Vec<f64>, vectors: Matrix) -> Result<Self> {
        let inverse = vectors.transpose();
        FourierBasis::new(vectors, inverse, values, true)
    }
}

#[derive(Debug, Clone)]
pub struct ShiftOperator {
    pub kind: GsoKind,
    pub matrix: Matrix,
    pub basis: FourierBasis,
    /// Upper bound on the spectral norm, derived from the degrees.
    pub rho_bound: f64,
}

impl ShiftOperator {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wrap an arbitrary matrix with a basis, e.g. for negative controls.
    pub fn custom(matrix: Matrix, basis: FourierBasis, rho_bound: f64) -> Result<Self> {
        if matrix.nrows() != basis.n() || matrix.ncols() != basis.n() {
            return Err(Error::DimensionMismatch { expected: basis.n(), found: matrix.nrows() });
        }
        Ok(ShiftOperator { kind: GsoKind::Custom, matrix, basis, rho_bound })
    }

    /// Dense `H = V diag(h(lambda)^order) V^{-1}`.
    pub fn filter_operator(&self, f: &FilterSpec, order: u32) -> Result<Matrix> {
        let gains = self.gains(f, order)?;
        let mut scaled = self.basis.vectors.clone();
        for (j, g) in gains.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*g);
        }
        Ok(scaled * &self.basis.inverse)
    }

    /// Per-component filter gains `h(lambda_i)^order`.
    pub fn gains(&self, f: &FilterSpec, order: u32) -> Result<Vec<f64>> {
        f.validate()?;
        self.basis
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| f.response(l, i).map(|h| h.powi(order as i32)))
            .collect()
    }
}

fn max_degree(g: &Graph) -> f64 {
    g.degrees().0.iter().copied().fold(0.0, f64::max)
}

fn degree_ratio(tm: &TransitionMatrix) -> f64 {
    let d = &tm.degrees().0;
    let hi = d.iter().copied().fold(0.0, f64::max);
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    (hi / lo).sqrt()
}

/// Build one of the shipped shift operators together with its Fourier basis.
pub fn build_gso(g: &Graph, kind: GsoKind) -> Result<ShiftOperator> {
    match kind {
        GsoKind::Adjacency => {
            let e = sym_eigen(g.weights(), EigenOrder::Descending)?;
            let basis = FourierBasis::orthonormal_from(e.values, e.vectors)?;
            Ok(ShiftOperator { kind, matrix: g.weights().clone(), basis, rho_bound: max_degree(g) })
        }
        GsoKind::Laplacian => {
            let l = laplacian(g, LaplacianKind::Combinatorial)?;
            let e = sym_eigen(&l, EigenOrder::Ascending)?;
            let basis = FourierBasis::orthonormal_from(e.values, e.vectors)?;
            Ok(ShiftOperator { kind, matrix: l, basis, rho_bound: 2.0 * max_degree(g) })
        }
        GsoKind::Markov => {
            let tm = TransitionMatrix::from_graph(g)?;
            let dec = decompose(&tm)?;
            let basis = FourierBasis::new(dec.right, dec.left.transpose(), dec.eigenvalues, false)?;
            let p = tm.matrix();
            let max_col = (0..p.ncols()).map(|j| p.column(j).sum()).fold(0.0, f64::max);
            Ok(ShiftOperator { kind, matrix: p.clone(), basis, rho_bound: max_col.sqrt() })
        }
        GsoKind::DiffusionMap { t, l, mode } => {
            let n = g.n();
            if l == 0 || l + 1 > n {
                return Err(Error::BadTruncation { l, max: n - 1 });
            }
            let tm = TransitionMatrix::from_graph(g)?;
            let dec = decompose(&tm)?;
            let ratio = degree_ratio(&tm);
            let (matrix, eigenvalues, rho_bound) = match mode {
                DmMode::TruncatedSpectral => {
                    let mut mu = alloc::vec![0.0; n];
                    for (j, m) in mu.iter_mut().enumerate().take(l + 1).skip(1) {
                        *m = eigen_power(dec.eigenvalues[j], t as f64).0;
                    }
                    let mut scaled = dec.right.columns(1, l).into_owned();
                    for j in 0..l {
                        scaled.column_mut(j).scale_mut(mu[j + 1]);
                    }
                    let m = scaled * dec.left.columns(1, l).transpose();
                    let top = mu.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                    (m, mu, ratio * top)
                }
                DmMode::IdentityMinusPower => {
                    let m = Matrix::identity(n, n) - matrix_power(tm.matrix(), t);
                    let mu = dec.eigenvalues.iter().map(|&v| 1.0 - v.powi(t as i32)).collect();
                    (m, mu, 1.0 + ratio)
                }
            };
            let basis = FourierBasis::new(dec.right, dec.left.transpose(), eigenvalues, false)?;
            Ok(ShiftOperator { kind, matrix, basis, rho_bound })
        }
        GsoKind::Custom => Err(Error::BadParams("custom operators are built with ShiftOperator::custom")),
    }
}

/// `x_hat = V^{-1} x`.
pub fn gft(basis: &FourierBasis, x: &Vector) -> Result<Vector> {
    check_len(basis.n(), x.len())?;
    Ok(&basis.inverse * x)
}

/// `x = V x_hat`.
pub fn igft(basis: &FourierBasis, spectrum: &Vector) -> Result<Vector> {
    check_len(basis.n(), spectrum.len())?;
    Ok(&basis.vectors * spectrum)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TikhonovSign {
    /// `1 / (1 + tau lambda)`, low-pass for nonnegative spectra.
    Plus,
    /// `1 / (1 - tau lambda)`.
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    Tikhonov {
        tau: f64,
        sign: TikhonovSign,
    },
    /// `exp(-t lambda)`
    Heat {
        t: f64,
    },
    /// `sum_l h_l lambda^l`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// Keep the first `cutoff` components in the basis ordering.
    Ideal {
        cutoff: usize,
    },
}

impl FilterSpec {
    pub fn identity() -> Self {
        FilterSpec::Polynomial { coeffs: alloc::vec![1.0] }
    }

    pub fn tikhonov(tau: f64) -> Self {
        FilterSpec::Tikhonov { tau, sign: TikhonovSign::Plus }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FilterSpec::Tikhonov { tau, .. } if !(0.0..=1.0).contains(tau) => {
                Err(Error::BadParams("tikhonov tau must lie in [0, 1]"))
            }
            FilterSpec::Heat { t } if !(*t >= 0.0 && t.is_finite()) => {
                Err(Error::BadParams("heat time must be nonnegative"))
            }
            FilterSpec::Polynomial { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => {
                Err(Error::BadParams("polynomial coefficients must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Response at eigenvalue `lambda`, which sits at position `index` of the basis.
    pub fn response(&self, lambda: f64, index: usize) -> Result<f64> {
        match self {
            FilterSpec::Tikhonov { tau, sign } => {
                let denom = match sign {
                    TikhonovSign::Plus => 1.0 + tau * lambda,
                    TikhonovSign::Minus => 1.0 - tau * lambda,
                };
                if denom.abs() <= POLE_TOL {
                    Err(Error::FilterPole(lambda))
                } else {
                    Ok(1.0 / denom)
                }
            }
            FilterSpec::Heat { t } => Ok((-t * lambda).exp()),
            FilterSpec::Polynomial { coeffs } => Ok(coeffs.iter().rev().fold(0.0, |acc, c| acc * lambda + c)),
            FilterSpec::Ideal { cutoff } => Ok(if index < *cutoff { 1.0 } else { 0.0 }),
        }
    }
}

/// `y = sum_i u_i h(lambda_i) x_hat_i`, evaluated in the spectral domain.
pub fn apply_filter(s: &ShiftOperator, f: &FilterSpec, x: &Vector) -> Result<Vector> {
    let gains = s.gains(f, 1)?;
    let mut spectrum = gft(&s.basis, x)?;
    for (c, g) in spectrum.iter_mut().zip(&gains) {
        *c *= g;
    }
    igft(&s.basis, &spectrum)
}

/// `sum_l h_l S^l x` by repeated matrix-vector products.
pub fn polynomial_apply(s: &ShiftOperator, coeffs: &[f64], x: &Vector) -> Result<Vector> {
    check_len(s.n(), x.len())?;
    let mut out = Vector::zeros(x.len());
    let mut power = x.clone();
    for (l, h) in coeffs.iter().enumerate() {
        if l > 0 {
            power = &s.matrix * &power;
        }
        out.axpy(*h, &power, 1.0);
    }
    Ok(out)
}

/// Polynomials of degree `>= n` add nothing a degree `n - 1` one could not express.
pub fn polynomial_is_wasteful(n: usize, coeffs: &[f64]) -> bool {
    coeffs.len() > n
}

/// Graph convolution: inverse transform of the pointwise product of spectra.
pub fn spectral_convolve(basis: &FourierBasis, f: &Vector, g: &Vector) -> Result<Vector> {
    let fh = gft(basis, f)?;
    let gh = gft(basis, g)?;
    igft(basis, &fh.component_mul(&gh))
}

/// Settings for [`check_gso_properties`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyCheck {
    pub probes: usize,
    pub seed: u64,
    pub linearity_tol: f64,
    pub convolutive_tol: f64,
    pub norm_tol: f64,
}

impl Default for PropertyCheck {
    fn default() -> Self {
        PropertyCheck { probes: 1000, seed: 0, linearity_tol: 1e-12, convolutive_tol: 1e-8, norm_tol: 1e-8 }
    }
}

/// Measured GSO properties; residuals are absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub linearity_residual: f64,
    pub convolutive_residual: f64,
    pub spectral_norm: f64,
    pub rho_bound: f64,
    pub energy_ratio_min: f64,
    pub energy_ratio_mean: f64,
    pub energy_ratio_max: f64,
    pub check: PropertyCheck,
}

impl PropertyReport {
    pub fn linear(&self) -> bool {
        self.linearity_residual <= self.check.linearity_tol
    }

    pub fn convolutive(&self) -> bool {
        self.convolutive_residual <= self.check.convolutive_tol
    }

    pub fn norm_bounded(&self) -> bool {
        self.spectral_norm <= self.rho_bound + self.check.norm_tol
    }

    /// `||S||_2 <= 1 + tol`.
    pub fn non_expansive(&self) -> bool {
        self.spectral_norm <= 1.0 + self.check.norm_tol
    }

    /// Largest probe energy ratio stays within `1 + tol`.
    pub fn probes_non_expansive(&self) -> bool {
        self.energy_ratio_max <= 1.0 + self.check.norm_tol
    }

    /// `(property, residual, pass)` rows.
    pub fn rows(&self) -> Vec<(&'static str, f64, bool)> {
        alloc::vec![
            ("linearity", self.linearity_residual, self.linear()),
            ("convolutive", self.convolutive_residual, self.convolutive()),
            ("norm_bound", self.spectral_norm - self.rho_bound, self.norm_bounded()),
            ("non_expansive", self.spectral_norm - 1.0, self.non_expansive()),
            ("energy_ratio_max", self.energy_ratio_max, self.probes_non_expansive()),
        ]
    }
}

/// Probe linearity, diagonalization by the basis, the norm bound and energy ratios.
pub fn check_gso_properties(s: &ShiftOperator, check: &PropertyCheck) -> PropertyReport {
    let n = s.n();
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let unit = |rng: &mut ChaCha8Rng| {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        v / norm
    };
    let mut linearity = 0.0_f64;
    let mut ratios = Vec::with_capacity(check.probes);
    for _ in 0..check.probes {
        let x = unit(&mut rng);
        let y = unit(&mut rng);
        let alpha: f64 = rng.random_range(-1.0..1.0);
        let lhs = &s.matrix * (&x * alpha + &y);
        let rhs = (&s.matrix * &x) * alpha + &s.matrix * &y;
        linearity = linearity.max((lhs - rhs).norm());
        ratios.push((&s.matrix * &x).norm());
    }
    let conj = &s.basis.inverse * &s.matrix * &s.basis.vectors;
    let mut convolutive = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                convolutive = convolutive.max(conj[(i, j)].abs());
            }
        }
    }
    let (lo, hi, sum) =
        ratios.iter().fold((f64::INFINITY, 0.0_f64, 0.0), |(lo, hi, sum), &r| (lo.min(r), hi.max(r), sum + r));
    let mean = if ratios.is_empty() { f64::NAN } else { sum / ratios.len() as f64 };
    PropertyReport {
        linearity_residual: linearity,
        convolutive_residual: convolutive,
        spectral_norm: spectral_norm(&s.matrix),
        rho_bound: s.rho_bound,
        energy_ratio_min: lo,
        energy_ratio_mean: mean,
        energy_ratio_max: hi,
        check: *check,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::stationary_distribution;
    use crate::graph::{build_graph, random_sensor_graph};

    fn path3() -> Graph {
        build_graph(Matrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]), None).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            w[(i, (i + 1) % n)] = 1.0;
            w[((i + 1) % n, i)] = 1.0;
        }
        build_graph(w, None).unwrap()
    }

    fn signal(n: usize, k: usize) -> Vector {
        Vector::from_fn(n, |i, _| ((i * 13 + k * 7) as f64 * 0.37).sin())
    }

    #[test]
    fn adjacency_passthrough() {
        let g = random_sensor_graph(10, 4, 3).unwrap();
        let s = build_gso(&g, GsoKind::Adjacency).unwrap();
        assert_eq!(&s.matrix, g.weights());
    }

    #[test]
    fn truncated_full_rank_is_p_minus_stationary_projection() {
        let g = random_sensor_graph(15, 5, 4).unwrap();
        let s = build_gso(&g, GsoKind::DiffusionMap { t: 1, l: 14, mode: DmMode::TruncatedSpectral }).unwrap();
        let tm = TransitionMatrix::from_graph(&g).unwrap();
        let pi = stationary_distribution(&decompose(&tm).unwrap()).unwrap();
        let want = tm.matrix() - Vector::from_element(15, 1.0) * pi.transpose();
        assert!(max_abs(&(s.matrix - want)) <= 1e-8);
    }

    #[test]
    fn identity_minus_power_t1_is_exact() {
        let g = random_sensor_graph(10, 8, 3).unwrap();
        let s = build_gso(&g, GsoKind::DiffusionMap { t: 1, l: 3, mode: DmMode::IdentityMinusPower }).unwrap();
        let tm = TransitionMatrix::from_graph(&g).unwrap();
        assert_eq!(s.matrix, Matrix::identity(10, 10) - tm.matrix());
    }

    #[test]
    fn bad_dm_params() {
        let g = path3();
        let r = build_gso(&g, GsoKind::DiffusionMap { t: 1, l: 3, mode: DmMode::TruncatedSpectral });
        assert_eq!(r.unwrap_err(), Error::BadTruncation { l: 3, max: 2 });
        let iso = build_graph(Matrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.]), None).unwrap();
        assert_eq!(build_gso(&iso, GsoKind::Markov).unwrap_err(), Error::IsolatedNode(2));
    }

    #[test]
    fn constant_signal_lives_in_laplacian_null_space() {
        let g = random_sensor_graph(12, 1, 4).unwrap();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let xh = gft(&s.basis, &Vector::from_element(12, 1.0)).unwrap();
        for k in 1..12 {
            assert!(xh[k].abs() <= 1e-10);
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let g = random_sensor_graph(20, 2, 4).unwrap();
        for kind in [GsoKind::Adjacency, GsoKind::Laplacian, GsoKind::Markov] {
            let s = build_gso(&g, kind).unwrap();
            let x = signal(20, 3);
            let xh = gft(&s.basis, &x).unwrap();
            assert!((igft(&s.basis, &xh).unwrap() - &x).norm() <= 1e-10);
            if s.basis.orthonormal {
                assert!((xh.norm() - x.norm()).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn igft_unit_impulse_and_zero() {
        let g = path3();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        assert_eq!(igft(&s.basis, &Vector::zeros(3)).unwrap(), Vector::zeros(3));
        let e1 = Vector::from_column_slice(&[0.0, 1.0, 0.0]);
        assert_eq!(igft(&s.basis, &e1).unwrap(), s.basis.vectors.column(1).into_owned());
        assert!(gft(&s.basis, &Vector::zeros(4)).is_err());
    }

    #[test]
    fn identity_filters_pass_signals() {
        let g = random_sensor_graph(14, 3, 4).unwrap();
        let x = signal(14, 1);
        for kind in [GsoKind::Laplacian, GsoKind::Markov] {
            let s = build_gso(&g, kind).unwrap();
            let y = apply_filter(&s, &FilterSpec::identity(), &x).unwrap();
            assert!((y - &x).norm() <= 1e-10);
            let y = apply_filter(&s, &FilterSpec::tikhonov(0.0), &x).unwrap();
            assert!((y - &x).norm() <= 1e-10);
        }
    }

    #[test]
    fn heat_keeps_constants() {
        let g = random_sensor_graph(14, 3, 4).unwrap();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let x = Vector::from_element(14, 2.5);
        let y = apply_filter(&s, &FilterSpec::Heat { t: 0.7 }, &x).unwrap();
        assert!((y - x).norm() <= 1e-10);
    }

    #[test]
    fn tikhonov_pole_is_reported() {
        let g = path3();
        let s = build_gso(&g, GsoKind::Markov).unwrap();
        let f = FilterSpec::Tikhonov { tau: 1.0, sign: TikhonovSign::Minus };
        assert!(matches!(apply_filter(&s, &f, &signal(3, 0)), Err(Error::FilterPole(_))));
        assert!(FilterSpec::tikhonov(1.5).validate().is_err());
    }

    #[test]
    fn ideal_filter_keeps_leading_components() {
        let g = path3();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let x = s.basis.vectors.column(2) * 2.0 + s.basis.vectors.column(0);
        let y = apply_filter(&s, &FilterSpec::Ideal { cutoff: 1 }, &x).unwrap();
        assert!((y - s.basis.vectors.column(0)).norm() <= 1e-12);
    }

    #[test]
    fn polynomial_matches_shift_and_identity() {
        let g = random_sensor_graph(9, 6, 3).unwrap();
        let s = build_gso(&g, GsoKind::Markov).unwrap();
        let x = signal(9, 2);
        assert_eq!(polynomial_apply(&s, &[0.0, 1.0], &x).unwrap(), &s.matrix * &x);
        assert_eq!(polynomial_apply(&s, &[1.0, 0.0, 0.0], &x).unwrap(), x);
        assert!(polynomial_is_wasteful(2, &[1.0, 2.0, 3.0]));
    }

    #[test]
    fn polynomial_matches_spectral_route_on_path() {
        // Oracle: S^2 x = U diag(lambda^2) U^T x with the path Laplacian eigenpairs {0, 1, 3}
        // in closed form: u0 = 1/sqrt3 (1,1,1), u1 = 1/sqrt2 (1,0,-1), u2 = 1/sqrt6 (1,-2,1).
        let g = path3();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let x = Vector::from_column_slice(&[0.3, -1.2, 2.0]);
        let u1 = Vector::from_column_slice(&[1.0, 0.0, -1.0]) / 2f64.sqrt();
        let u2 = Vector::from_column_slice(&[1.0, -2.0, 1.0]) / 6f64.sqrt();
        let want = &u1 * u1.dot(&x) + &u2 * (9.0 * u2.dot(&x));
        let got = polynomial_apply(&s, &[0.0, 0.0, 1.0], &x).unwrap();
        assert!((got - &want).norm() <= 1e-10);
        let spectral = apply_filter(&s, &FilterSpec::Polynomial { coeffs: alloc::vec![0.0, 0.0, 1.0] }, &x).unwrap();
        assert!((spectral - want).norm() <= 1e-10);
    }

    #[test]
    fn convolution_identities() {
        let g = cycle(4);
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let f = Vector::from_column_slice(&[1.0, -0.5, 2.0, 0.25]);
        let g2 = Vector::from_column_slice(&[0.5, 0.1, -0.7, 1.5]);
        let ones = igft(&s.basis, &Vector::from_element(4, 1.0)).unwrap();
        assert!((spectral_convolve(&s.basis, &f, &ones).unwrap() - &f).norm() <= 1e-10);
        let fg = spectral_convolve(&s.basis, &f, &g2).unwrap();
        let gf = spectral_convolve(&s.basis, &g2, &f).unwrap();
        assert!((&fg - gf).norm() <= 1e-12);
        // direct summation over eigenpairs
        let mut direct = Vector::zeros(4);
        for l in 0..4 {
            let u = s.basis.vectors.column(l);
            direct += u * (u.dot(&f) * u.dot(&g2));
        }
        assert!((fg - direct).norm() <= 1e-10);
    }

    #[test]
    fn laplacian_properties_pass() {
        let g = random_sensor_graph(15, 11, 4).unwrap();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let r = check_gso_properties(&s, &PropertyCheck { probes: 200, ..Default::default() });
        assert!(r.linear() && r.convolutive() && r.norm_bounded());
        assert_eq!(r.rows().len(), 5);
    }

    #[test]
    fn markov_on_regular_graph_has_unit_norm() {
        // power-method oracle on P^T P
        let g = cycle(7);
        let s = build_gso(&g, GsoKind::Markov).unwrap();
        let ptp = s.matrix.transpose() * &s.matrix;
        let mut v = Vector::from_fn(7, |i, _| 1.0 + i as f64);
        let mut est = 0.0;
        for _ in 0..200 {
            let w = &ptp * &v;
            est = w.norm() / v.norm();
            v = &w / w.norm();
        }
        let r = check_gso_properties(&s, &PropertyCheck { probes: 50, ..Default::default() });
        assert!((r.spectral_norm - 1.0).abs() <= 1e-8);
        assert!((est.sqrt() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn nonsymmetric_negative_control_is_not_convolutive() {
        let g = random_sensor_graph(10, 2, 3).unwrap();
        let lap = build_gso(&g, GsoKind::Laplacian).unwrap();
        let m = Matrix::from_fn(10, 10, |i, j| ((i * 10 + j) as f64 * 1.7).sin());
        let s = ShiftOperator::custom(m, lap.basis.clone(), f64::INFINITY).unwrap();
        let r = check_gso_properties(&s, &PropertyCheck { probes: 10, ..Default::default() });
        assert!(r.convolutive_residual > 0.01);
        assert!(!r.convolutive());
    }

    #[test]
    fn filters_commute_with_the_shift() {
        let g = random_sensor_graph(12, 9, 4).unwrap();
        let x = signal(12, 5);
        for kind in
            [GsoKind::Laplacian, GsoKind::Markov, GsoKind::DiffusionMap { t: 2, l: 5, mode: DmMode::TruncatedSpectral }]
        {
            let s = build_gso(&g, kind).unwrap();
            let f = FilterSpec::tikhonov(0.4);
            let lhs = apply_filter(&s, &f, &(&s.matrix * &x)).unwrap();
            let rhs = &s.matrix * apply_filter(&s, &f, &x).unwrap();
            assert!((lhs - rhs).norm() <= 1e-8);
        }
    }

    #[test]
    fn truncation_nests() {
        let g = random_sensor_graph(16, 4, 4).unwrap();
        let full = build_gso(&g, GsoKind::DiffusionMap { t: 1, l: 8, mode: DmMode::TruncatedSpectral }).unwrap();
        let part = build_gso(&g, GsoKind::DiffusionMap { t: 1, l: 5, mode: DmMode::TruncatedSpectral }).unwrap();
        let diff = &full.matrix - &part.matrix;
        let b = &full.basis;
        let mut want = Matrix::zeros(16, 16);
        for j in 6..=8 {
            want += b.vectors.column(j) * b.inverse.row(j) * b.eigenvalues[j];
        }
        assert!(max_abs(&(diff - want)) <= 1e-10);
    }
}
