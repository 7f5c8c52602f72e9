//! Weighted undirected graphs, Laplacians and geometric graph builders.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffusion::{median_bandwidth, pairwise_sq_distances};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Mean Earth radius used for great-circle distances, in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Sub-seed attempts made by [`random_sensor_graph`] before giving up.
pub const SENSOR_GRAPH_ATTEMPTS: usize = 10;

/// Simple undirected graph with nonnegative weights and no self-loops.
///
/// The weight matrix is exactly symmetric; both invariants are checked on
/// construction and the type is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: Matrix,
    coords: Option<Matrix>,
}

/// Node degrees `d_i = sum_j W_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    /// Fails on the first zero-degree node.
    pub fn require_positive(&self) -> Result<()> {
        match self.0.iter().position(|&d| d <= 0.0) {
            Some(i) => Err(Error::IsolatedNode(i)),
            None => Ok(()),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `D - W`
    Combinatorial,
    /// `D^{-1/2} (D - W) D^{-1/2}`
    SymNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    Euclidean,
    /// Haversine distance in km; coordinates are `(latitude, longitude)` in degrees.
    GreatCircle,
}

/// Validate a weight matrix (and optional node coordinates) into a [`Graph`].
pub fn build_graph(weights: Matrix, coords: Option<Matrix>) -> Result<Graph> {
    let n = weights.nrows();
    if weights.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.ncols() });
    }
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    for i in 0..n {
        for j in 0..n {
            let w = weights[(i, j)];
            if !w.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight(i, j));
            }
        }
        if weights[(i, i)] != 0.0 {
            return Err(Error::SelfLoop(i));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if weights[(i, j)] != weights[(j, i)] {
                return Err(Error::NotSymmetric(i, j));
            }
        }
    }
    if let Some(c) = &coords {
        if c.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.nrows() });
        }
    }
    Ok(Graph { weights, coords })
}

impl Graph {
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn coords(&self) -> Option<&Matrix> {
        self.coords.as_ref()
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(self.weights.row_iter().map(|r| r.sum()).collect())
    }

    /// Number of undirected edges with positive weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| ((i + 1)..n).filter(|&j| self.weights[(i, j)] > 0.0).count()).sum()
    }

    /// Component label per node, labels assigned in order of first node.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if self.weights[(u, v)] > 0.0 && label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::NotConnected)
        }
    }

    pub fn laplacian(&self, kind: LaplacianKind) -> Result<Matrix> {
        laplacian(self, kind)
    }
}

/// Combinatorial or symmetric-normalized Laplacian.
pub fn laplacian(g: &Graph, kind: LaplacianKind) -> Result<Matrix> {
    let n = g.n();
    let deg = g.degrees();
    let mut l = -g.weights.clone();
    for i in 0..n {
        l[(i, i)] = deg.0[i];
    }
    match kind {
        LaplacianKind::Combinatorial => Ok(l),
        LaplacianKind::SymNormalized => {
            deg.require_positive()?;
            let s: Vec<f64> = deg.0.iter().map(|d| 1.0 / d.sqrt()).collect();
            for i in 0..n {
                for j in 0..n {
                    l[(i, j)] *= s[i] * s[j];
                }
            }
            Ok(l)
        }
    }
}

/// Great-circle distance in km between two `(lat, lon)` points given in degrees.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la1, lo1) = (a.0.to_radians(), a.1.to_radians());
    let (la2, lo2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Pairwise (non-squared) distances under `metric`.
pub fn pairwise_distances(coords: &Matrix, metric: DistanceMetric) -> Result<Matrix> {
    let n = coords.nrows();
    match metric {
        DistanceMetric::Euclidean => Ok(pairwise_sq_distances(coords).map(|v| v.sqrt())),
        DistanceMetric::GreatCircle => {
            if coords.ncols() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: coords.ncols() });
            }
            for i in 0..n {
                let (lat, lon) = (coords[(i, 0)], coords[(i, 1)]);
                if !(lat.abs() <= 90.0 && lon.abs() <= 180.0) {
                    return Err(Error::BadCoordinates(i));
                }
            }
            let mut d = Matrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = haversine_km((coords[(i, 0)], coords[(i, 1)]), (coords[(j, 0)], coords[(j, 1)]));
                    d[(i, j)] = v;
                    d[(j, i)] = v;
                }
            }
            Ok(d)
        }
    }
}

/// Connect every pair within `radius`, weighting edges by `exp(-dist^2 / (2 sigma^2))`.
pub fn radius_graph(coords: &Matrix, radius: f64, metric: DistanceMetric, sigma: f64) -> Result<Graph> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::BadParams("radius must be positive"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::BadParams("sigma must be positive"));
    }
    let dist = pairwise_distances(coords, metric)?;
    Ok(threshold_kernel(&dist, radius, sigma, coords.clone()))
}

fn threshold_kernel(dist: &Matrix, radius: f64, sigma: f64, coords: Matrix) -> Graph {
    let n = dist.nrows();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[(i, j)];
            if d <= radius {
                let v = (-d * d / (2.0 * sigma * sigma)).exp();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    Graph { weights: w, coords: Some(coords) }
}

/// Random geometric sensor graph on the unit square.
///
/// Nodes are wired to their `k` nearest neighbours (symmetrised), with `k`
/// raised until the average degree reaches `avg_degree`. Edge weights use a
/// Gaussian kernel whose bandwidth is the median heuristic over all node
/// positions. Disconnected draws are retried with fresh sub-seeds.
pub fn random_sensor_graph(n: usize, seed: u64, avg_degree: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    if avg_degree < 1 {
        return Err(Error::BadParams("avg_degree must be at least 1"));
    }
    for attempt in 0..SENSOR_GRAPH_ATTEMPTS {
        let sub_seed = seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let coords = Matrix::from_fn(n, 2, |_, _| rng.random::<f64>());
        let g = knn_sensor_graph(&coords, avg_degree)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected(SENSOR_GRAPH_ATTEMPTS))
}

fn knn_sensor_graph(coords: &Matrix, avg_degree: usize) -> Result<Graph> {
    let n = coords.nrows();
    let dist = pairwise_sq_distances(coords).map(|v| v.sqrt());
    let order: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut nb: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            nb.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
            nb
        })
        .collect();
    let sigma = median_bandwidth(coords, 0.5)?;
    let mut adj = vec![vec![false; n]; n];
    for k in 1..n {
        for (i, nb) in order.iter().enumerate() {
            let j = nb[k - 1];
            adj[i][j] = true;
            adj[j][i] = true;
        }
        let total: usize = adj.iter().map(|r| r.iter().filter(|&&b| b).count()).sum();
        if total >= avg_degree * n {
            break;
        }
    }
    let w = Matrix::from_fn(
        n,
        n,
        |i, j| {
            if adj[i][j] {
                (-dist[(i, j)].powi(2) / (2.0 * sigma * sigma)).exp()
            } else {
                0.0
            }
        },
    );
    Ok(Graph { weights: w, coords: Some(coords.clone()) })
}

/// `side x side` lattice with unit weights between 4-neighbours; node `r * side + c`.
pub fn lattice_graph(side: usize) -> Result<Graph> {
    let n = side * side;
    let mut w = Matrix::zeros(n, n);
    for r in 0..side {
        for c in 0..side {
            let u = r * side + c;
            if c + 1 < side {
                w[(u, u + 1)] = 1.0;
                w[(u + 1, u)] = 1.0;
            }
            if r + 1 < side {
                w[(u, u + side)] = 1.0;
                w[(u + side, u)] = 1.0;
            }
        }
    }
    let coords = Matrix::from_fn(n, 2, |u, k| if k == 0 { (u / side) as f64 } else { (u % side) as f64 });
    build_graph(w, Some(coords))
}

/// `L * 1`; zero for any combinatorial Laplacian.
pub fn laplacian_row_sums(l: &Matrix) -> Vector {
    l * Vector::from_element(l.ncols(), 1.0)
}
