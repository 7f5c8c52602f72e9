//! Seeded synthetic data, benchmark grids and the lattice filter demo.

use alloc::string::String;
use alloc::vec::Vec;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::diffusion::TransitionMatrix;
use crate::error::{Error, Result};
use crate::graph::{lattice_graph, random_sensor_graph, Graph};
use crate::gso::{build_gso, DmMode, FilterSpec, GsoKind, TikhonovSign};
use crate::learning::{learn_pipeline, LearnMethod, LearnOptions, Pipeline};
use crate::linalg::{Matrix, Vector};
use crate::metrics::{spectrum_ree, weight_nrmse, MetricOptions};

/// Mixed into the seed so signal draws are independent of the graph draw.
const SIGNAL_STREAM: u64 = 0x5157_4E41_4C53_0001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOptions {
    pub n: usize,
    pub seed: u64,
    pub m_signals: usize,
    pub avg_degree: usize,
    /// Standard deviation of the additive Gaussian noise.
    pub noise_std: f64,
    /// Frequencies are drawn uniformly from this range.
    pub freq_range: (f64, f64),
}

impl SyntheticOptions {
    pub fn new(n: usize, seed: u64, m_signals: usize) -> Self {
        SyntheticOptions { n, seed, m_signals, avg_degree: 6, noise_std: 0.05, freq_range: (1.0, 3.0) }
    }
}

/// Random sensor graph plus `m_signals` smooth signals, one per row.
///
/// Signal `k` is `sin(a_k <c_v, theta_k> + b_k)` plus Gaussian noise, where
/// `c_v` are node positions and `theta_k` a random unit direction.
pub fn gen_synthetic(opts: &SyntheticOptions) -> Result<(Graph, Matrix)> {
    if opts.n < 4 {
        return Err(Error::TooSmall(opts.n));
    }
    if opts.m_signals < 2 {
        return Err(Error::TooFewObservations(opts.m_signals));
    }
    let (lo, hi) = opts.freq_range;
    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::BadParams("frequency range must be ordered"));
    }
    let noise = Normal::new(0.0, opts.noise_std).map_err(|_| Error::BadParams("noise_std must be nonnegative"))?;
    let g = random_sensor_graph(opts.n, opts.seed, opts.avg_degree)?;
    let coords = g.coords().ok_or(Error::NumericalFailure)?.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ SIGNAL_STREAM);
    let mut x = Matrix::zeros(opts.m_signals, opts.n);
    for k in 0..opts.m_signals {
        let a = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let angle = rng.random_range(0.0..core::f64::consts::TAU);
        let b = rng.random_range(0.0..core::f64::consts::TAU);
        let (s, c) = angle.sin_cos();
        for v in 0..opts.n {
            let proj = coords[(v, 0)] * c + coords[(v, 1)] * s;
            x[(k, v)] = (a * proj + b).sin() + noise.sample(&mut rng);
        }
    }
    Ok((g, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GsoChoice {
    A,
    L,
    P,
    DM,
}

impl GsoChoice {
    pub const ALL: [GsoChoice; 4] = [GsoChoice::A, GsoChoice::L, GsoChoice::P, GsoChoice::DM];

    pub fn label(self) -> &'static str {
        match self {
            GsoChoice::A => "A",
            GsoChoice::L => "L",
            GsoChoice::P => "P",
            GsoChoice::DM => "DM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        GsoChoice::ALL.into_iter().find(|g| g.label().eq_ignore_ascii_case(s))
    }
}

/// Filter family swept by the grid; the grid value is its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterFamily {
    Tikhonov(TikhonovSign),
    Heat,
}

impl FilterFamily {
    pub fn spec(self, param: f64) -> FilterSpec {
        match self {
            FilterFamily::Tikhonov(sign) => FilterSpec::Tikhonov { tau: param, sign },
            FilterFamily::Heat => FilterSpec::Heat { t: param },
        }
    }
}

/// Everything a benchmark grid needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dataset: String,
    pub gso_list: Vec<GsoChoice>,
    pub tau_grid: Vec<f64>,
    /// Filter orders; the cell's filter response is `h^t`.
    pub t_grid: Vec<u32>,
    pub filter: FilterFamily,
    pub method: LearnMethod,
    /// Diffusion-map truncation; `None` keeps all `n - 1` nontrivial components.
    pub dm_l: Option<usize>,
    /// Diffusion time of the diffusion-map operator.
    pub dm_time: u32,
    pub dm_mode: DmMode,
    pub learn: LearnOptions,
    pub metrics: MetricOptions,
}

impl GridSpec {
    pub fn new(dataset: &str) -> Self {
        GridSpec {
            dataset: dataset.into(),
            gso_list: GsoChoice::ALL.to_vec(),
            tau_grid: (1..=10).map(|k| k as f64 / 10.0).collect(),
            t_grid: alloc::vec![1],
            filter: FilterFamily::Tikhonov(TikhonovSign::Plus),
            method: LearnMethod::MarkovVariation,
            dm_l: None,
            dm_time: 1,
            dm_mode: DmMode::TruncatedSpectral,
            learn: LearnOptions::default(),
            metrics: MetricOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gso_list.is_empty() || self.tau_grid.is_empty() || self.t_grid.is_empty() {
            return Err(Error::BadParams("grids must be non-empty"));
        }
        if self.tau_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::BadParams("tau values must lie in [0, 1]"));
        }
        let mut seen = self.gso_list.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.gso_list.len() {
            return Err(Error::BadParams("duplicate GSO in gso_list"));
        }
        self.learn.validate()
    }

    pub fn gso_kind(&self, choice: GsoChoice, n: usize) -> GsoKind {
        match choice {
            GsoChoice::A => GsoKind::Adjacency,
            GsoChoice::L => GsoKind::Laplacian,
            GsoChoice::P => GsoKind::Markov,
            GsoChoice::DM => GsoKind::DiffusionMap {
                t: self.dm_time,
                l: self.dm_l.unwrap_or(n.saturating_sub(1)),
                mode: self.dm_mode,
            },
        }
    }

    /// Cells in table order: GSO-major, then tau, then t.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &gso in &self.gso_list {
            for &tau in &self.tau_grid {
                for &t in &self.t_grid {
                    out.push(Cell { gso, tau, t });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub gso: GsoChoice,
    pub tau: f64,
    pub t: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub gso: GsoChoice,
    pub tau: f64,
    pub t: u32,
    /// NaN when the cell failed.
    pub ree: f64,
    pub nrmse: f64,
    pub iters: usize,
    pub converged: bool,
}

impl ResultRow {
    /// Bitwise comparison, so NaN cells compare equal.
    pub fn same_as(&self, other: &ResultRow) -> bool {
        self.dataset == other.dataset
            && self.gso == other.gso
            && self.tau.to_bits() == other.tau.to_bits()
            && self.t == other.t
            && self.ree.to_bits() == other.ree.to_bits()
            && self.nrmse.to_bits() == other.nrmse.to_bits()
            && self.iters == other.iters
            && self.converged == other.converged
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn find(&self, gso: GsoChoice, tau: f64, t: u32) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.gso == gso && r.tau == tau && r.t == t)
    }

    pub fn same_as(&self, other: &ResultTable) -> bool {
        self.rows.len() == other.rows.len() && self.rows.iter().zip(&other.rows).all(|(a, b)| a.same_as(b))
    }
}

/// Run one grid cell; failures become a NaN row with `converged = false`.
pub fn run_cell(spec: &GridSpec, g: &Graph, x: &Matrix, cell: Cell) -> ResultRow {
    let mut row = ResultRow {
        dataset: spec.dataset.clone(),
        gso: cell.gso,
        tau: cell.tau,
        t: cell.t,
        ree: f64::NAN,
        nrmse: f64::NAN,
        iters: 0,
        converged: false,
    };
    let pipeline = Pipeline {
        gso: spec.gso_kind(cell.gso, g.n()),
        filter: spec.filter.spec(cell.tau),
        filter_order: cell.t,
        method: spec.method,
    };
    if let Ok(res) = learn_pipeline(x, g, &pipeline, &spec.learn) {
        row.iters = res.iterations;
        row.converged = res.converged;
        if let Ok(r) = spectrum_ree(g.weights(), &res.w_est, &spec.metrics) {
            row.ree = r.value;
        }
        if let Ok(v) = weight_nrmse(g.weights(), &res.w_est) {
            row.nrmse = v;
        }
    }
    row
}

/// Run every cell in order on one thread.
pub fn run_grid(spec: &GridSpec, g: &Graph, x: &Matrix) -> Result<ResultTable> {
    spec.validate()?;
    if x.ncols() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), found: x.ncols() });
    }
    let rows = spec.cells().into_iter().map(|c| run_cell(spec, g, x, c)).collect();
    Ok(ResultTable { rows })
}

/// Operator applied once per lattice frame.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeStep {
    /// Multiply by the shift itself; the Markov shift spreads mass with `P^T`.
    Shift(GsoKind),
    /// Apply `H(S)` through the shift's Fourier basis.
    Filter { gso: GsoKind, filter: FilterSpec },
}

/// Snapshots `x_t = H^t delta` on a `side x side` lattice, `t = 0..=t_max`.
pub fn lattice_demo(side: usize, step: &LatticeStep, t_max: usize) -> Result<Vec<Vector>> {
    if side < 3 {
        return Err(Error::TooSmall(side));
    }
    let g = lattice_graph(side)?;
    let n = g.n();
    let op = match step {
        LatticeStep::Shift(GsoKind::Markov) => TransitionMatrix::from_graph(&g)?.matrix().transpose(),
        LatticeStep::Shift(kind) => build_gso(&g, *kind)?.matrix,
        LatticeStep::Filter { gso, filter } => build_gso(&g, *gso)?.filter_operator(filter, 1)?,
    };
    let mut x = Vector::zeros(n);
    x[lattice_center(side)] = 1.0;
    let mut frames = Vec::with_capacity(t_max + 1);
    frames.push(x.clone());
    for _ in 0..t_max {
        x = &op * &x;
        frames.push(x.clone());
    }
    Ok(frames)
}

pub fn lattice_center(side: usize) -> usize {
    (side / 2) * side + side / 2
}

/// Largest hop distance from the center among entries above `floor` in magnitude.
pub fn support_radius(frame: &Vector, side: usize, floor: f64) -> usize {
    let (cr, cc) = (side / 2, side / 2);
    frame
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > floor)
        .map(|(u, _)| (u / side).abs_diff(cr) + (u % side).abs_diff(cc))
        .max()
        .unwrap_or(0)
}
