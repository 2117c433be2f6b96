//! Consensus learning of explicit linear projections and kernel expansions.
//!
//! Both variants reuse the free-embedding optimizer on a restricted feasible
//! set `Y_v = P_vᵀ F_v`, where `F_v` is the view's feature matrix (`X_v` for
//! projections, the training kernel `K_φ` for kernel expansions). `F_v` is
//! first compressed to a full-row-rank basis `B_v` with `F_v = U_r B_v`, so
//! the per-view pencils `(B (α^r M − λ K) Bᵀ, B C Bᵀ)` stay definite even when
//! `X_v C X_vᵀ` or `K_φ C K_φ` is singular. The learned coefficients map back
//! as `P_v = U_r Q_v`.

use alloc::vec::Vec;

use crate::consensus::{ConsensusProblem, EmbeddingResult, Hyperparams, Scheme};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{self, check_finite, sym_eig, Matrix};
use crate::problem::ManifoldSpec;

/// Eigenvalues of a training kernel below `−KERNEL_PSD_TOL · |tr K|` are rejected.
pub const KERNEL_PSD_TOL: f64 = 1e-8;

/// A compressed feature map: `F = lift · basis`.
struct Reduced {
    basis: Matrix,
    lift: Matrix,
}

fn reduce_features(x: &Matrix) -> Result<Reduced> {
    check_finite(x)?;
    let (rows, cols) = x.shape();
    let wide = rows <= cols;
    let mut g = if wide { x * x.transpose() } else { x.tr_mul(x) };
    linalg::symmetrize(&mut g);
    let eig = sym_eig(&g)?;
    let k = g.nrows();
    let top = eig.values[k - 1].max(0.0);
    let tol = top * rows.max(cols) as f64 * f64::EPSILON;
    let keep: Vec<usize> = (0..k).rev().filter(|&i| eig.values[i] > tol).collect();
    let mut basis = Matrix::zeros(keep.len(), cols);
    let mut lift = Matrix::zeros(rows, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        let u = eig.vectors.column(src);
        if wide {
            basis.set_row(dst, &(u.transpose() * x));
            lift.set_column(dst, &u);
        } else {
            let sigma = libm::sqrt(eig.values[src]);
            basis.set_row(dst, &(u.transpose() * sigma));
            lift.set_column(dst, &(x * u / sigma));
        }
    }
    Ok(Reduced { basis, lift })
}

fn reduce_kernel(k: &Matrix, view: usize) -> Result<Reduced> {
    let eig = sym_eig(k)?;
    let n = k.nrows();
    let scale = libm::fabs(k.trace()).max(f64::MIN_POSITIVE);
    let lowest = eig.values[0];
    if lowest < -KERNEL_PSD_TOL * scale {
        return Err(Error::NonPsdKernel {
            view,
            min_eigenvalue: lowest,
        });
    }
    let top = eig.values[n - 1];
    let tol = top.max(0.0) * n as f64 * f64::EPSILON;
    let keep: Vec<usize> = (0..n).rev().filter(|&i| eig.values[i] > tol).collect();
    let mut basis = Matrix::zeros(keep.len(), n);
    let mut lift = Matrix::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        let u = eig.vectors.column(src);
        basis.set_row(dst, &(u.transpose() * eig.values[src]));
        lift.set_column(dst, &u);
    }
    Ok(Reduced { basis, lift })
}

fn lift_coefficients(reduced: &[Reduced], result: &EmbeddingResult) -> Vec<Matrix> {
    reduced
        .iter()
        .zip(&result.state.coefficients)
        .map(|(r, q)| &r.lift * q)
        .collect()
}

/// Per-view linear projections `W_v` (`D_v x d_v`) with `Y_v = W_vᵀ X_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    pub projections: Vec<Matrix>,
    pub hyperparams: Hyperparams,
    /// Optimizer output on the training samples (embeddings, weights, trace).
    pub result: EmbeddingResult,
}

impl ProjectionModel {
    pub fn alpha(&self) -> &[f64] {
        self.result.alpha()
    }
}

/// Consensus learning of linear projections; `specs` are the `N x N` factors
/// `M_v, C_v` of the projected problems `WᵀX M XᵀW` / `WᵀX C XᵀW`.
pub fn subspace_consensus(
    xs: &[Matrix],
    specs: &[ManifoldSpec],
    hp: &Hyperparams,
    scheme: Scheme,
) -> Result<ProjectionModel> {
    if xs.len() != specs.len() {
        return Err(Error::DimensionMismatch {
            context: "views",
            expected: specs.len(),
            found: xs.len(),
        });
    }
    let reduced = xs.iter().map(reduce_features).collect::<Result<Vec<_>>>()?;
    let bases = reduced.iter().map(|r| r.basis.clone()).collect();
    let result = ConsensusProblem::with_bases(specs, bases)?.run(hp, scheme)?;
    Ok(ProjectionModel {
        projections: lift_coefficients(&reduced, &result),
        hyperparams: hp.clone(),
        result,
    })
}

/// `Y_v = W_vᵀ X_v` for new samples (`D_v x N'` per view).
pub fn apply_projection(model: &ProjectionModel, xs: &[Matrix]) -> Result<Vec<Matrix>> {
    if xs.len() != model.projections.len() {
        return Err(Error::DimensionMismatch {
            context: "views",
            expected: model.projections.len(),
            found: xs.len(),
        });
    }
    model
        .projections
        .iter()
        .zip(xs)
        .map(|(w, x)| {
            if x.nrows() != w.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "projection input dimension",
                    expected: w.nrows(),
                    found: x.nrows(),
                });
            }
            Ok(w.tr_mul(x))
        })
        .collect()
}

/// Training kernel for one view.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelInput {
    Precomputed(Matrix),
    Features { x: Matrix, kernel: Kernel },
}

/// Per-view expansion coefficients `β_v` (`N x d_v`) with `Y_v = β_vᵀ K_φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub coefficients: Vec<Matrix>,
    pub kernels: Vec<Kernel>,
    /// Symmetrized training kernels.
    pub train_kernels: Vec<Matrix>,
    /// Training features for views given as features, needed for new samples.
    pub train_features: Vec<Option<Matrix>>,
    pub hyperparams: Hyperparams,
    pub result: EmbeddingResult,
}

impl KernelModel {
    pub fn alpha(&self) -> &[f64] {
        self.result.alpha()
    }

    /// Embed new samples of feature-defined views (`D_v x N'` per view).
    pub fn embed_features(&self, xs: &[Matrix]) -> Result<Vec<Matrix>> {
        if xs.len() != self.kernels.len() {
            return Err(Error::DimensionMismatch {
                context: "views",
                expected: self.kernels.len(),
                found: xs.len(),
            });
        }
        let cross = self
            .kernels
            .iter()
            .zip(&self.train_features)
            .zip(xs)
            .map(|((kernel, train), x)| match train {
                Some(train) => kernel.matrix(train, x),
                None => Err(Error::InvalidParameter(
                    "precomputed views need explicit kernel values".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        apply_kernel(self, &cross)
    }
}

/// Consensus learning of kernel expansions.
pub fn kernel_consensus(
    inputs: &[KernelInput],
    specs: &[ManifoldSpec],
    hp: &Hyperparams,
    scheme: Scheme,
) -> Result<KernelModel> {
    if inputs.len() != specs.len() {
        return Err(Error::DimensionMismatch {
            context: "views",
            expected: specs.len(),
            found: inputs.len(),
        });
    }
    let mut kernels = Vec::with_capacity(inputs.len());
    let mut train_kernels = Vec::with_capacity(inputs.len());
    let mut train_features = Vec::with_capacity(inputs.len());
    let mut reduced = Vec::with_capacity(inputs.len());
    for (view, (input, spec)) in inputs.iter().zip(specs).enumerate() {
        let (kernel, mut k, features) = match input {
            KernelInput::Precomputed(k) => (Kernel::Precomputed, k.clone(), None),
            KernelInput::Features { x, kernel } => (*kernel, kernel.matrix(x, x)?, Some(x.clone())),
        };
        if k.nrows() != spec.n() || k.ncols() != spec.n() {
            return Err(Error::DimensionMismatch {
                context: "training kernel",
                expected: spec.n(),
                found: k.nrows(),
            });
        }
        check_finite(&k)?;
        linalg::symmetrize(&mut k);
        reduced.push(reduce_kernel(&k, view)?);
        kernels.push(kernel);
        train_kernels.push(k);
        train_features.push(features);
    }
    let bases = reduced.iter().map(|r| r.basis.clone()).collect();
    let result = ConsensusProblem::with_bases(specs, bases)?.run(hp, scheme)?;
    Ok(KernelModel {
        coefficients: lift_coefficients(&reduced, &result),
        kernels,
        train_kernels,
        train_features,
        hyperparams: hp.clone(),
        result,
    })
}

/// `Y_v = β_vᵀ K_new` where `K_new` holds `k(x_train_i, x_new_j)` (`N x N'`).
pub fn apply_kernel(model: &KernelModel, kernels: &[Matrix]) -> Result<Vec<Matrix>> {
    if kernels.len() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            context: "views",
            expected: model.coefficients.len(),
            found: kernels.len(),
        });
    }
    model
        .coefficients
        .iter()
        .zip(kernels)
        .map(|(beta, k)| {
            if k.nrows() != beta.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "kernel rows (training samples)",
                    expected: beta.nrows(),
                    found: k.nrows(),
                });
            }
            Ok(beta.tr_mul(k))
        })
        .collect()
}

#[cfg(test)]
mod tests;
