//! Dense symmetric linear algebra shared by every solver in the crate.
//!
//! Embeddings are stored as `d x N` matrices (one column per sample), so the
//! linear-kernel similarity of an embedding is `YᵀY` and the quadratic
//! objective is `tr(Y M Yᵀ)`.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Ridge multipliers (times `trace(C) / N`) tried when `C` is not numerically PD.
pub const RIDGE_LADDER: [f64; 3] = [1e-10, 1e-8, 1e-6];

// Cholesky pivots below this fraction of the mean diagonal count as a failure.
const MIN_PIVOT: f64 = 1e-13;

/// Which end of the spectrum to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Smallest,
    Largest,
}

/// Eigenpairs of a symmetric matrix or pencil.
///
/// `vectors` column `i` belongs to `values[i]`. Full decompositions are sorted
/// ascending; partial ones are ordered from the requested end inwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub values: DVector<f64>,
    pub vectors: Matrix,
}

impl SymEig {
    /// Eigenvectors as rows, i.e. the `d x N` embedding they define.
    pub fn embedding(&self) -> Matrix {
        self.vectors.transpose()
    }
}

pub(crate) fn check_square(a: &Matrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub(crate) fn check_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn check_symmetric(a: &Matrix) -> Result<()> {
    let n = check_square(a)?;
    check_finite(a)?;
    let scale = a.amax();
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NonSymmetric { asymmetry: asym });
    }
    Ok(())
}

pub(crate) fn symmetrize(a: &mut Matrix) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Flip each column so its first non-negligible component is positive.
pub(crate) fn fix_signs(vectors: &mut Matrix) {
    for mut col in vectors.column_iter_mut() {
        let scale = col.amax();
        if scale == 0.0 {
            continue;
        }
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

fn eig_unchecked(a: Matrix) -> Result<SymEig> {
    let n = a.nrows();
    let (raw_values, raw_vectors) = symmetric_eigen(a)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw_values[i].total_cmp(&raw_values[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| raw_values[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &raw_vectors.column(src));
    }
    fix_signs(&mut vectors);
    Ok(SymEig { values, vectors })
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eig(a: &Matrix) -> Result<SymEig> {
    check_symmetric(a)?;
    let mut a = a.clone();
    symmetrize(&mut a);
    eig_unchecked(a)
}

fn select(eig: SymEig, d: usize, side: Side) -> SymEig {
    let n = eig.values.len();
    let idx: Vec<usize> = match side {
        Side::Smallest => (0..d).collect(),
        Side::Largest => (0..d).map(|i| n - 1 - i).collect(),
    };
    let values = DVector::from_iterator(d, idx.iter().map(|&i| eig.values[i]));
    let mut vectors = Matrix::zeros(n, d);
    for (dst, &src) in idx.iter().enumerate() {
        vectors.set_column(dst, &eig.vectors.column(src));
    }
    SymEig { values, vectors }
}

/// Factorization `C = L Lᵀ` of a constraint matrix, used to turn the pencil
/// `A v = η C v` into the ordinary symmetric problem on `L⁻¹ A L⁻ᵀ`.
#[derive(Debug, Clone)]
pub enum Whitener {
    Identity(usize),
    Cholesky { l: Matrix, ridge: f64 },
}

impl Whitener {
    /// Factor `c`, walking [`RIDGE_LADDER`] if the plain factorization fails.
    pub fn new(c: &Matrix) -> Result<Self> {
        let n = check_square(c)?;
        check_symmetric(c)?;
        let scale = c.trace() / n as f64;
        if let Some(l) = try_cholesky(c, scale) {
            return Ok(Whitener::Cholesky { l, ridge: 0.0 });
        }
        let mut last = 0.0;
        if scale > 0.0 {
            for factor in RIDGE_LADDER {
                let ridge = factor * scale;
                last = ridge;
                let mut ridged = c.clone();
                for i in 0..n {
                    ridged[(i, i)] += ridge;
                }
                if let Some(l) = try_cholesky(&ridged, scale) {
                    return Ok(Whitener::Cholesky { l, ridge });
                }
            }
        }
        Err(Error::CholeskyFailure { ridge: last })
    }

    pub fn identity(n: usize) -> Self {
        Whitener::Identity(n)
    }

    pub fn size(&self) -> usize {
        match self {
            Whitener::Identity(n) => *n,
            Whitener::Cholesky { l, .. } => l.nrows(),
        }
    }

    /// Ridge that had to be added to the constraint matrix (0 when none).
    pub fn ridge(&self) -> f64 {
        match self {
            Whitener::Identity(_) => 0.0,
            Whitener::Cholesky { ridge, .. } => *ridge,
        }
    }

    fn whiten(&self, a: Matrix) -> Matrix {
        match self {
            Whitener::Identity(_) => a,
            Whitener::Cholesky { l, .. } => {
                let left = l
                    .solve_lower_triangular(&a)
                    .expect("cholesky factor has a positive diagonal");
                let both = l
                    .solve_lower_triangular(&left.transpose())
                    .expect("cholesky factor has a positive diagonal");
                both.transpose()
            }
        }
    }

    fn unwhiten(&self, u: Matrix) -> Matrix {
        match self {
            Whitener::Identity(_) => u,
            Whitener::Cholesky { l, .. } => l
                .tr_solve_lower_triangular(&u)
                .expect("cholesky factor has a positive diagonal"),
        }
    }

    /// `d` extreme eigenpairs of the pencil `(a, C)`; vectors are C-orthonormal.
    pub fn extreme(&self, a: &Matrix, d: usize, side: Side) -> Result<SymEig> {
        let n = self.size();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "pencil",
                expected: n,
                found: a.nrows(),
            });
        }
        if d > n {
            return Err(Error::DimensionTooLarge {
                requested: d,
                available: n,
            });
        }
        check_finite(a)?;
        let mut w = self.whiten(a.clone());
        symmetrize(&mut w);
        let eig = select(eig_unchecked(w)?, d, side);
        let mut vectors = self.unwhiten(eig.vectors);
        fix_signs(&mut vectors);
        Ok(SymEig {
            values: eig.values,
            vectors,
        })
    }
}

fn try_cholesky(c: &Matrix, scale: f64) -> Option<Matrix> {
    let chol = Cholesky::new(c.clone())?;
    let l = chol.unpack();
    let min_pivot = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot <= MIN_PIVOT * scale.abs() {
        return None;
    }
    Some(l)
}

/// `d` extreme eigenpairs of the symmetric-definite pencil `A v = η C v`.
///
/// Solved by Cholesky whitening: with `C = L Lᵀ` the pencil has the same
/// eigenvalues as `L⁻¹ A L⁻ᵀ`, whose eigenvectors `u` map back as `v = L⁻ᵀ u`.
/// The returned vectors satisfy `Vᵀ C V = I`.
pub fn gen_eig_extreme(a: &Matrix, c: &Matrix, d: usize, side: Side) -> Result<SymEig> {
    let n = check_square(a)?;
    check_symmetric(a)?;
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "pencil constraint",
            expected: n,
            found: c.nrows(),
        });
    }
    if d > n {
        return Err(Error::DimensionTooLarge {
            requested: d,
            available: n,
        });
    }
    Whitener::new(c)?.extreme(a, d, side)
}

/// Linear-kernel similarity `YᵀY` of a `d x N` embedding.
pub fn gram(y: &Matrix) -> Matrix {
    let mut k = y.tr_mul(y);
    symmetrize(&mut k);
    k
}

/// `tr(Y M Yᵀ)` for a `d x N` embedding and an `N x N` matrix.
pub fn trace_form(y: &Matrix, m: &Matrix) -> Result<f64> {
    if m.nrows() != y.ncols() || m.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            context: "trace form",
            expected: y.ncols(),
            found: m.nrows(),
        });
    }
    Ok((y * m).component_mul(y).sum())
}

/// `‖Y C Yᵀ − I‖_F`.
pub fn constraint_residual(y: &Matrix, c: Option<&Matrix>) -> f64 {
    let mut g = match c {
        Some(c) => y * c * y.transpose(),
        None => y * y.transpose(),
    };
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    g.norm()
}
