use alloc::vec::Vec;

use crate::consensus::Scheme;
use crate::linalg::Matrix;

/// Mutable optimizer state. Embeddings are `d_v x N`, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusState {
    pub embeddings: Vec<Matrix>,
    /// `K_v = Y_vᵀ Y_v`, refreshed on every embedding update.
    pub grams: Vec<Matrix>,
    pub centroid: Option<Matrix>,
    pub alpha: Vec<f64>,
    /// Completed sweeps.
    pub iteration: usize,
    pub objective_trace: Vec<f64>,
    /// Per-view coefficients in the view's reduced basis (`Y_v = Qᵀ B`).
    pub(crate) coefficients: Vec<Matrix>,
}

impl ConsensusState {
    /// All view embeddings stacked row-wise (`Σ d_v x N`).
    pub fn stacked(&self) -> Matrix {
        let rows: usize = self.embeddings.iter().map(|y| y.nrows()).sum();
        let n = self.embeddings.first().map_or(0, |y| y.ncols());
        let mut out = Matrix::zeros(rows, n);
        let mut at = 0;
        for y in &self.embeddings {
            out.view_mut((at, 0), (y.nrows(), n)).copy_from(y);
            at += y.nrows();
        }
        out
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 0 is the initial state, then one record per completed sweep.
    pub iteration: usize,
    pub objective: f64,
    /// `‖Y_v C_v Y_vᵀ − I‖_F` per view.
    pub residuals: Vec<f64>,
    /// `‖Y_* Y_*ᵀ − I‖_F` for the centroid scheme.
    pub centroid_residual: Option<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    pub scheme: Scheme,
    pub state: ConsensusState,
    pub converged: bool,
    pub iterations_used: usize,
    pub objective_trace: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    /// Final constraint residuals per view.
    pub residuals: Vec<f64>,
}

impl EmbeddingResult {
    pub fn embeddings(&self) -> &[Matrix] {
        &self.state.embeddings
    }

    pub fn centroid(&self) -> Option<&Matrix> {
        self.state.centroid.as_ref()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.state.alpha
    }

    /// The representation handed to downstream classifiers: the centroid for
    /// the centroid scheme, the stacked view embeddings otherwise.
    pub fn output(&self) -> Matrix {
        match (&self.scheme, &self.state.centroid) {
            (Scheme::Centroid, Some(c)) => c.clone(),
            _ => self.state.stacked(),
        }
    }

    /// `trace[t+1] <= trace[t] + rel_tol * |trace[t]|` for every step.
    pub fn is_monotone(&self, rel_tol: f64) -> bool {
        self.objective_trace
            .windows(2)
            .all(|w| w[1] <= w[0] + rel_tol * libm::fabs(w[0]))
    }
}
