//! Kernel functions over the columns of feature matrices.

use alloc::format;

use crate::error::{Error, Result};
use crate::graph::{median, pairwise_sq_distances};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `xᵀy`
    Linear,
    /// `exp(−‖x − y‖² / σ²)`
    Rbf { sigma: f64 },
    /// `(xᵀy + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
    /// Kernel values supplied directly by the caller.
    Precomputed,
}

impl Kernel {
    /// RBF with σ set to the median pairwise distance of the columns of `x`.
    pub fn rbf_median(x: &Matrix) -> Self {
        let d = pairwise_sq_distances(x);
        let n = x.ncols();
        let mut dists = alloc::vec::Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 0..n {
            for i in (j + 1)..n {
                dists.push(libm::sqrt(d[(i, j)]));
            }
        }
        let sigma = median(&mut dists);
        Kernel::Rbf {
            sigma: if sigma > 0.0 { sigma } else { 1.0 },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Rbf { .. } => "rbf",
            Kernel::Polynomial { .. } => "polynomial",
            Kernel::Precomputed => "precomputed",
        }
    }

    /// `k(a_i, b_j)` for all column pairs: an `Na x Nb` matrix.
    pub fn matrix(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch {
                context: "kernel feature dimension",
                expected: a.nrows(),
                found: b.nrows(),
            });
        }
        let dot = a.tr_mul(b);
        match *self {
            Kernel::Linear => Ok(dot),
            Kernel::Polynomial { degree, offset } => Ok(dot.map(|v| libm::pow(v + offset, degree as f64))),
            Kernel::Rbf { sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!("rbf sigma must be > 0, got {sigma}")));
                }
                let s2 = sigma * sigma;
                Ok(Matrix::from_fn(a.ncols(), b.ncols(), |i, j| {
                    libm::exp(-(a.column(i) - b.column(j)).norm_squared() / s2)
                }))
            }
            Kernel::Precomputed => Err(Error::InvalidParameter(
                "precomputed kernels cannot be evaluated on features".into(),
            )),
        }
    }
}
