//! Neighbourhood graphs over the columns of a `D x N` feature matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Default neighbourhood size, clamped to `N - 1` by the builders.
pub const DEFAULT_K: usize = 10;

/// Default LLE ridge, relative to the trace of each local Gram matrix.
pub const DEFAULT_RIDGE: f64 = 1e-3;

/// Directed k-nearest-neighbour lists.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub k: usize,
    /// `neighbors[i]` is sorted by distance, ties by index.
    pub neighbors: Vec<Vec<usize>>,
    /// Euclidean distance of each edge, aligned with `neighbors`.
    pub distances: Vec<Vec<f64>>,
}

impl NeighborGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Squared Euclidean distances between all column pairs.
pub fn pairwise_sq_distances(x: &Matrix) -> Matrix {
    let n = x.ncols();
    let mut d = Matrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let s = (x.column(i) - x.column(j)).norm_squared();
            d[(i, j)] = s;
            d[(j, i)] = s;
        }
    }
    d
}

/// Euclidean k nearest neighbours of every column, ties broken by smaller index.
pub fn knn_neighbors(x: &Matrix, k: usize) -> Result<NeighborGraph> {
    let n = x.ncols();
    if k == 0 || k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    let d = pairwise_sq_distances(x);
    let mut neighbors = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| d[(i, a)].total_cmp(&d[(i, b)]).then(a.cmp(&b)));
        order.truncate(k);
        distances.push(order.iter().map(|&j| libm::sqrt(d[(i, j)])).collect());
        neighbors.push(order.clone());
    }
    Ok(NeighborGraph {
        k,
        neighbors,
        distances,
    })
}

/// Affine reconstruction weights of each sample from its neighbours.
///
/// Row `i` minimizes `‖x_i − Σ_j w_j x_j‖² + reg ‖w‖²` subject to `Σ_j w_j = 1`
/// over the neighbours of `i`, where `reg = ridge · tr(G_i)` (or `ridge` when the
/// local Gram `G_i` vanishes). With `ridge = 0` a singular local Gram is an error.
pub fn lle_weights(x: &Matrix, graph: &NeighborGraph, ridge: f64) -> Result<Matrix> {
    let n = x.ncols();
    if graph.len() != n {
        return Err(Error::DimensionMismatch {
            context: "neighbour graph",
            expected: n,
            found: graph.len(),
        });
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("ridge must be >= 0, got {ridge}")));
    }
    let mut w = Matrix::zeros(n, n);
    for (i, nbrs) in graph.neighbors.iter().enumerate() {
        let k = nbrs.len();
        let mut z = Matrix::zeros(x.nrows(), k);
        for (c, &j) in nbrs.iter().enumerate() {
            z.set_column(c, &(x.column(j) - x.column(i)));
        }
        let mut g = z.tr_mul(&z);
        let tr = g.trace();
        let reg = if tr > 0.0 { ridge * tr } else { ridge };
        for a in 0..k {
            g[(a, a)] += reg;
        }
        let ones = Matrix::from_element(k, 1, 1.0);
        let sol = g
            .cholesky()
            .map(|c| c.solve(&ones))
            .ok_or(Error::SingularLocalGram { sample: i })?;
        let total = sol.sum();
        if !total.is_finite() || total == 0.0 {
            return Err(Error::SingularLocalGram { sample: i });
        }
        for (c, &j) in nbrs.iter().enumerate() {
            w[(i, j)] = sol[(c, 0)] / total;
        }
    }
    Ok(w)
}

/// Symmetric heat-kernel weights `exp(−‖x_i − x_j‖² / σ²)` on the union of
/// kNN edges (`i ~ j` when either is among the other's neighbours).
pub fn heat_kernel_weights(graph: &NeighborGraph, sigma: f64) -> Matrix {
    let n = graph.len();
    let s2 = sigma * sigma;
    let mut w = Matrix::zeros(n, n);
    for (i, (nbrs, dists)) in graph.neighbors.iter().zip(&graph.distances).enumerate() {
        for (&j, &dist) in nbrs.iter().zip(dists) {
            let v = libm::exp(-dist * dist / s2);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

/// Median edge length of the symmetrized kNN graph; 1 when all edges are zero.
pub fn median_edge_length(graph: &NeighborGraph) -> f64 {
    let n = graph.len();
    let mut seen = vec![false; n * n];
    let mut lengths = Vec::new();
    for (i, (nbrs, dists)) in graph.neighbors.iter().zip(&graph.distances).enumerate() {
        for (&j, &dist) in nbrs.iter().zip(dists) {
            let key = i.min(j) * n + i.max(j);
            if !seen[key] {
                seen[key] = true;
                lengths.push(dist);
            }
        }
    }
    let m = median(&mut lengths);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}
