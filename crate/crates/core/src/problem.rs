//! Per-view quadratic problems `min/max tr(Y M Yᵀ)` s.t. `Y C Yᵀ = I`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{self, DEFAULT_K, DEFAULT_RIDGE};
use crate::linalg::{check_square, check_symmetric, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lle,
    Le,
    Pca,
    Npe,
    Lda,
    Custom,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lle => "lle",
            Method::Le => "le",
            Method::Pca => "pca",
            Method::Npe => "npe",
            Method::Lda => "lda",
            Method::Custom => "custom",
        }
    }
}

/// Constraint matrix `C`; `Identity` avoids materializing `I_N`.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Identity,
    Matrix(Matrix),
}

impl Constraint {
    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            Constraint::Identity => None,
            Constraint::Matrix(c) => Some(c),
        }
    }

    pub fn to_dense(&self, n: usize) -> Matrix {
        match self {
            Constraint::Identity => Matrix::identity(n, n),
            Constraint::Matrix(c) => c.clone(),
        }
    }
}

/// One view's `(M, C)` pair with its objective sense.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub m: Matrix,
    pub c: Constraint,
    pub sense: Sense,
    pub method: Method,
}

impl ManifoldSpec {
    /// A user-supplied pair; both matrices must be symmetric and `N x N`.
    pub fn custom(m: Matrix, c: Constraint, sense: Sense) -> Result<Self> {
        let n = check_square(&m)?;
        check_symmetric(&m)?;
        if let Constraint::Matrix(c) = &c {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "constraint matrix",
                    expected: n,
                    found: c.nrows(),
                });
            }
            check_symmetric(c)?;
        }
        Ok(Self {
            m,
            c,
            sense,
            method: Method::Custom,
        })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// `M` for minimize-sense specs, `−M` for maximize-sense ones.
    pub fn minimize_form(&self) -> Matrix {
        match self.sense {
            Sense::Minimize => self.m.clone(),
            Sense::Maximize => -&self.m,
        }
    }
}

fn clamp_k(k: usize, n: usize) -> usize {
    k.min(n.saturating_sub(1))
}

fn reconstruction_form(w: &Matrix) -> Matrix {
    let n = w.nrows();
    let iw = Matrix::identity(n, n) - w;
    let mut m = iw.tr_mul(&iw);
    crate::linalg::symmetrize(&mut m);
    m
}

/// LLE: `M = (I − W)ᵀ(I − W)`, `C = I`, minimize.
pub fn lle_spec(x: &Matrix, k: usize, ridge: f64) -> Result<ManifoldSpec> {
    let g = graph::knn_neighbors(x, k)?;
    let w = graph::lle_weights(x, &g, ridge)?;
    Ok(ManifoldSpec {
        m: reconstruction_form(&w),
        c: Constraint::Identity,
        sense: Sense::Minimize,
        method: Method::Lle,
    })
}

/// NPE: `M = −(I − W)ᵀ(I − W)`, `C = I`, maximize.
pub fn npe_spec(x: &Matrix, k: usize, ridge: f64) -> Result<ManifoldSpec> {
    let mut spec = lle_spec(x, k, ridge)?;
    spec.m.neg_mut();
    spec.sense = Sense::Maximize;
    spec.method = Method::Npe;
    Ok(spec)
}

/// Heat-kernel bandwidth for Laplacian eigenmaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median edge length of the symmetrized kNN graph.
    Adaptive,
}

/// LE: heat-kernel weights on the symmetrized kNN graph, `M = D − W`, `C = D`.
pub fn le_spec(x: &Matrix, k: usize, bandwidth: Bandwidth) -> Result<ManifoldSpec> {
    let g = graph::knn_neighbors(x, k)?;
    let sigma = match bandwidth {
        Bandwidth::Fixed(s) if s > 0.0 && s.is_finite() => s,
        Bandwidth::Fixed(s) => {
            return Err(Error::InvalidParameter(format!("bandwidth must be > 0, got {s}")))
        }
        Bandwidth::Adaptive => graph::median_edge_length(&g),
    };
    let mut spec = laplacian_spec(&graph::heat_kernel_weights(&g, sigma))?;
    spec.method = Method::Le;
    Ok(spec)
}

/// Unnormalized Laplacian pair `(D − W, D)` of a symmetric weight matrix.
pub fn laplacian_spec(weights: &Matrix) -> Result<ManifoldSpec> {
    let n = check_square(weights)?;
    check_symmetric(weights)?;
    let degrees: Vec<f64> = weights.row_iter().map(|r| r.sum()).collect();
    let mut m = -weights;
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] += degrees[i];
        d[(i, i)] = degrees[i];
    }
    Ok(ManifoldSpec {
        m,
        c: Constraint::Matrix(d),
        sense: Sense::Minimize,
        method: Method::Le,
    })
}

fn centering(n: usize) -> Matrix {
    let mut h = Matrix::from_element(n, n, -1.0 / n as f64);
    for i in 0..n {
        h[(i, i)] += 1.0;
    }
    h
}

/// PCA: `M = (I − J/N)ᵀ(I − J/N)`, `C = (XᵀX + εI)⁻¹` with `ε = 1e-8·tr(XᵀX)/N`, maximize.
pub fn pca_spec(x: &Matrix) -> Result<ManifoldSpec> {
    let n = x.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("pca needs at least 2 samples, got {n}")));
    }
    let h = centering(n);
    let mut m = h.tr_mul(&h);
    crate::linalg::symmetrize(&mut m);
    let mut g = x.tr_mul(x);
    let eps = 1e-8 * g.trace() / n as f64;
    let eps = if eps > 0.0 { eps } else { 1e-8 };
    for i in 0..n {
        g[(i, i)] += eps;
    }
    let mut c = g
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or(Error::CholeskyFailure { ridge: eps })?;
    crate::linalg::symmetrize(&mut c);
    Ok(ManifoldSpec {
        m,
        c: Constraint::Matrix(c),
        sense: Sense::Maximize,
        method: Method::Pca,
    })
}

/// LDA: `M_ij = 1/N_c` when `i, j` share class `c`, `C = I − M`, maximize.
///
/// Classes are `0..=max(labels)`; a class in that range with no sample is an error.
pub fn lda_spec(labels: &[usize]) -> Result<ManifoldSpec> {
    let n = labels.len();
    let classes = labels.iter().copied().max().map_or(0, |c| c + 1);
    let mut counts = vec![0usize; classes];
    for &l in labels {
        counts[l] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass { class });
    }
    let m = Matrix::from_fn(n, n, |i, j| {
        if labels[i] == labels[j] {
            1.0 / counts[labels[i]] as f64
        } else {
            0.0
        }
    });
    let c = Matrix::identity(n, n) - &m;
    Ok(ManifoldSpec {
        m,
        c: Constraint::Matrix(c),
        sense: Sense::Maximize,
        method: Method::Lda,
    })
}

/// Builder choice for one view, with its graph hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViewMethod {
    Lle { k: usize, ridge: f64 },
    Le { k: usize, bandwidth: Bandwidth },
    Pca,
    Npe { k: usize, ridge: f64 },
    Lda,
}

impl ViewMethod {
    pub fn lle() -> Self {
        ViewMethod::Lle {
            k: DEFAULT_K,
            ridge: DEFAULT_RIDGE,
        }
    }

    pub fn le() -> Self {
        ViewMethod::Le {
            k: DEFAULT_K,
            bandwidth: Bandwidth::Adaptive,
        }
    }

    pub fn npe() -> Self {
        ViewMethod::Npe {
            k: DEFAULT_K,
            ridge: DEFAULT_RIDGE,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            ViewMethod::Lle { .. } => Method::Lle,
            ViewMethod::Le { .. } => Method::Le,
            ViewMethod::Pca => Method::Pca,
            ViewMethod::Npe { .. } => Method::Npe,
            ViewMethod::Lda => Method::Lda,
        }
    }

    /// Same method with its neighbourhood size replaced (no-op for PCA/LDA).
    pub fn with_k(self, k: usize) -> Self {
        match self {
            ViewMethod::Lle { ridge, .. } => ViewMethod::Lle { k, ridge },
            ViewMethod::Le { bandwidth, .. } => ViewMethod::Le { k, bandwidth },
            ViewMethod::Npe { ridge, .. } => ViewMethod::Npe { k, ridge },
            other => other,
        }
    }

    pub fn uses_labels(&self) -> bool {
        matches!(self, ViewMethod::Lda)
    }

    /// Build the spec for a `D x N` view; `k` is clamped to `N − 1`.
    pub fn build(&self, x: &Matrix, labels: &[usize]) -> Result<ManifoldSpec> {
        let n = x.ncols();
        match *self {
            ViewMethod::Lle { k, ridge } => lle_spec(x, clamp_k(k, n), ridge),
            ViewMethod::Le { k, bandwidth } => le_spec(x, clamp_k(k, n), bandwidth),
            ViewMethod::Pca => pca_spec(x),
            ViewMethod::Npe { k, ridge } => npe_spec(x, clamp_k(k, n), ridge),
            ViewMethod::Lda => {
                if labels.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: "labels",
                        expected: n,
                        found: labels.len(),
                    });
                }
                lda_spec(labels)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gen_eig_extreme, gram, sym_eig, Side};
    use nalgebra::{dmatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(d: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(d, n, |_, _| StandardNormal.sample(&mut rng))
    }

    fn ones_residual(m: &Matrix) -> f64 {
        (m * DVector::from_element(m.nrows(), 1.0)).norm()
    }

    #[test]
    fn zero_weights_give_identity() {
        assert_eq!(reconstruction_form(&Matrix::zeros(3, 3)), Matrix::identity(3, 3));
    }

    #[test]
    fn lle_annihilates_constants_and_is_psd() {
        let x = random(3, 6, 1);
        let spec = lle_spec(&x, 3, DEFAULT_RIDGE).unwrap();
        assert_eq!(spec.method, Method::Lle);
        assert_eq!(spec.c, Constraint::Identity);
        assert!(ones_residual(&spec.m) <= 1e-8 * spec.m.norm());
        assert!(sym_eig(&spec.m).unwrap().values[0] >= -1e-10);
    }

    #[test]
    fn path_graph_laplacian() {
        let w = dmatrix![0.0, 1.0, 0.0; 1.0, 0.0, 1.0; 0.0, 1.0, 0.0];
        let spec = laplacian_spec(&w).unwrap();
        assert_eq!(spec.m, dmatrix![1.0, -1.0, 0.0; -1.0, 2.0, -1.0; 0.0, -1.0, 1.0]);
        assert_eq!(spec.c, Constraint::Matrix(dmatrix![1.0, 0.0, 0.0; 0.0, 2.0, 0.0; 0.0, 0.0, 1.0]));
    }

    #[test]
    fn le_laplacian_properties() {
        let x = random(4, 12, 2);
        let spec = le_spec(&x, 3, Bandwidth::Adaptive).unwrap();
        assert!(ones_residual(&spec.m) <= 1e-8 * spec.m.norm());
        assert!(sym_eig(&spec.m).unwrap().values[0] >= -1e-10 * spec.m.norm());
        assert!(le_spec(&x, 3, Bandwidth::Fixed(0.0)).is_err());
    }

    #[test]
    fn le_fiedler_vector_separates_clusters() {
        let mut x = random(2, 8, 4) * 0.1;
        for j in 4..8 {
            x[(0, j)] += 5.0;
        }
        let spec = le_spec(&x, 3, Bandwidth::Adaptive).unwrap();
        let c = spec.c.to_dense(8);
        let eig = gen_eig_extreme(&spec.m, &c, 2, Side::Smallest).unwrap();
        let fiedler = eig.vectors.column(1);
        let left = fiedler[0].signum();
        assert!((0..4).all(|j| fiedler[j].signum() == left));
        assert!((4..8).all(|j| fiedler[j].signum() == -left));
    }

    #[test]
    fn pca_two_samples() {
        let spec = pca_spec(&dmatrix![1.0, 2.0; 0.5, -1.0]).unwrap();
        let expected = dmatrix![0.5, -0.5; -0.5, 0.5];
        assert!((spec.m - expected).amax() < 1e-15);
        assert!(pca_spec(&dmatrix![1.0; 2.0]).is_err());
    }

    #[test]
    fn pca_pencil_matches_covariance_scores() {
        let mut x = random(3, 10, 5);
        for j in 0..10 {
            x[(0, j)] = 3.0 * x[(0, j)] + 1.0;
        }
        let spec = pca_spec(&x).unwrap();
        assert!(ones_residual(&spec.m) < 1e-12);
        let c = spec.c.to_dense(10);
        let y = gen_eig_extreme(&spec.m, &c, 2, Side::Largest).unwrap().embedding();
        // oracle: top-2 covariance eigenvectors applied to centered data
        let h = centering(10);
        let xc = &x * &h;
        let cov = &xc * xc.transpose();
        let u = sym_eig(&cov).unwrap().vectors.columns(1, 2).into_owned();
        let scores = u.transpose() * &xc;
        // the pencil embedding equals the scores up to rotation and a per-sample offset
        let centered = &h * gram(&y) * &h;
        assert!((centered - gram(&scores)).norm() <= 1e-6 * gram(&scores).norm());
    }

    #[test]
    fn npe_is_negated_lle() {
        let x = random(3, 8, 6);
        let lle = lle_spec(&x, 3, DEFAULT_RIDGE).unwrap();
        let npe = npe_spec(&x, 3, DEFAULT_RIDGE).unwrap();
        assert_eq!(npe.m, -&lle.m);
        assert_eq!(npe.sense, Sense::Maximize);
        assert_eq!(npe.minimize_form(), lle.minimize_form());
        let a = gen_eig_extreme(&lle.m, &Matrix::identity(8, 8), 2, Side::Smallest).unwrap();
        let b = gen_eig_extreme(&npe.m, &Matrix::identity(8, 8), 2, Side::Largest).unwrap();
        assert!((gram(&a.embedding()) - gram(&b.embedding())).norm() <= 1e-8);
    }

    #[test]
    fn lda_blocks() {
        let spec = lda_spec(&[0, 0, 1, 1]).unwrap();
        let expected = dmatrix![
            0.5, 0.5, 0.0, 0.0;
            0.5, 0.5, 0.0, 0.0;
            0.0, 0.0, 0.5, 0.5;
            0.0, 0.0, 0.5, 0.5
        ];
        assert_eq!(spec.m, expected);
        let single = lda_spec(&[0, 0, 0]).unwrap();
        assert!((&single.m - Matrix::from_element(3, 3, 1.0 / 3.0)).amax() < 1e-15);
        assert!((single.c.to_dense(3) - centering(3)).amax() < 1e-15);
        assert_eq!(lda_spec(&[0, 2, 2]), Err(Error::EmptyClass { class: 1 }));
    }

    #[test]
    fn lda_is_idempotent_with_psd_complement() {
        let labels = [2, 0, 1, 1, 0, 2, 2, 0, 1, 1];
        let spec = lda_spec(&labels).unwrap();
        assert!((&spec.m * &spec.m - &spec.m).amax() <= 1e-10);
        let c = spec.c.to_dense(10);
        assert!(sym_eig(&c).unwrap().values[0] >= -1e-10);
    }

    #[test]
    fn custom_validates() {
        assert!(ManifoldSpec::custom(dmatrix![1.0, 2.0; 0.0, 1.0], Constraint::Identity, Sense::Minimize).is_err());
        assert!(ManifoldSpec::custom(
            Matrix::identity(2, 2),
            Constraint::Matrix(Matrix::identity(3, 3)),
            Sense::Minimize
        )
        .is_err());
    }
}
