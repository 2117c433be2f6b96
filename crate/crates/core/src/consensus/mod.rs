//! Alternating optimization of the similarity-consensus objectives.
//!
//! Pairwise scheme:
//!
//! ```text
//! F = Σ_v (α_v)^r tr(Y_v M_v Y_vᵀ) − λ Σ_{v<w} tr(K_v K_w) + γ Σ_v (α_v)^r
//! ```
//!
//! Centroid scheme:
//!
//! ```text
//! F = Σ_v (α_v)^r tr(Y_v M_v Y_vᵀ) − λ Σ_v tr(K_v K_*) + γ Σ_v (α_v)^r
//! ```
//!
//! with `K = YᵀY`, `Y_v C_v Y_vᵀ = I`, `Y_* Y_*ᵀ = I` and `α` on the simplex.
//! Each block update (one view, the centroid, the weights) is an exact
//! minimizer with the others fixed, so the objective never increases.
//!
//! The pairwise consensus counts every unordered pair of views once. That is
//! the normalization under which the view update
//! `L_v = (α_v)^r M_v − λ Σ_{w≠v} K_w` is the exact block minimizer.

mod state;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, constraint_residual, gram, Matrix, Side, Whitener};
use crate::problem::ManifoldSpec;

pub use state::{ConsensusState, EmbeddingResult, TraceRecord};

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_R: f64 = 2.0;
pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Pairwise,
    Centroid,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Pairwise => "pairwise",
            Scheme::Centroid => "centroid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Consensus trade-off.
    pub lambda: f64,
    /// Weight regularizer.
    pub gamma: f64,
    /// Weight exponent, strictly greater than 1.
    pub r: f64,
    /// Embedding dimension per view.
    pub dims: Vec<usize>,
    /// Centroid dimension (centroid scheme only).
    pub centroid_dim: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Hyperparams {
    /// Defaults with the same dimension for every view and the centroid.
    pub fn new(views: usize, dim: usize) -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            gamma: DEFAULT_GAMMA,
            r: DEFAULT_R,
            dims: vec![dim; views],
            centroid_dim: dim,
            max_iters: DEFAULT_MAX_ITERS,
            rel_tol: DEFAULT_REL_TOL,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self, views: usize, n: usize) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(alloc::format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(alloc::format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if !(self.r > 1.0 && self.r.is_finite()) {
            return bad(alloc::format!("r must be finite and > 1, got {}", self.r));
        }
        if !(self.rel_tol > 0.0) {
            return bad(alloc::format!("rel_tol must be > 0, got {}", self.rel_tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if self.dims.len() != views {
            return Err(Error::DimensionMismatch {
                context: "per-view dims",
                expected: views,
                found: self.dims.len(),
            });
        }
        for &d in self.dims.iter().chain(core::iter::once(&self.centroid_dim)) {
            if d == 0 || d + 1 > n {
                return bad(alloc::format!("embedding dimension {d} outside 1..={}", n.saturating_sub(1)));
            }
        }
        Ok(())
    }
}

/// `S(K_v, K_w) = tr(K_v K_w)` for symmetric similarity matrices.
pub fn consensus_similarity(kv: &Matrix, kw: &Matrix) -> Result<f64> {
    if kv.shape() != kw.shape() || kv.nrows() != kv.ncols() {
        return Err(Error::DimensionMismatch {
            context: "similarity matrices",
            expected: kv.nrows(),
            found: kw.nrows(),
        });
    }
    Ok(kv.component_mul(kw).sum())
}

/// Closed-form weights `α_v ∝ (1 / (t_v + γ))^{1/(r−1)}` on the simplex.
pub fn update_alpha(traces: &[f64], r: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("r must be > 1, got {r}")));
    }
    let exponent = 1.0 / (r - 1.0);
    let mut logs = Vec::with_capacity(traces.len());
    for (view, &t) in traces.iter().enumerate() {
        let denom = t + gamma;
        if !(denom > 0.0) {
            return Err(Error::NonPositiveDenominator { view, value: denom });
        }
        logs.push(-exponent * libm::log(denom));
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| libm::exp(l - top)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|a| a / total).collect())
}

/// Top-`d` eigenvectors (as rows) of `Σ_v K_v`.
pub fn centroid_embedding(grams: &[Matrix], d: usize) -> Result<Matrix> {
    let first = grams.first().ok_or_else(|| Error::InvalidParameter("no views".into()))?;
    let mut total = first.clone();
    for k in &grams[1..] {
        total += k;
    }
    let n = total.nrows();
    if d > n {
        return Err(Error::DimensionTooLarge {
            requested: d,
            available: n,
        });
    }
    Ok(Whitener::identity(n).extreme(&total, d, Side::Largest)?.embedding())
}

#[derive(Debug, Clone)]
struct PreparedView {
    /// Minimize-form `M` (N x N).
    m: Matrix,
    /// `C`; `None` is the identity.
    c: Option<Matrix>,
    /// Feature basis `B` (r x N): embeddings are `Y = Qᵀ B`. `None` is `I_N`.
    basis: Option<Matrix>,
    /// `B M Bᵀ`, or `M` without a basis.
    m_reduced: Matrix,
    whitener: Whitener,
}

impl PreparedView {
    fn rank(&self) -> usize {
        self.whitener.size()
    }

    /// `B Y_wᵀ`, the factor whose outer product is `B K_w Bᵀ`.
    fn project(&self, y: &Matrix) -> Matrix {
        match &self.basis {
            Some(b) => b * y.transpose(),
            None => y.transpose(),
        }
    }
}

/// Views prepared for repeated pencil solves (factored constraints, cached
/// reduced matrices). Shared by the free-embedding, subspace and kernel paths.
#[derive(Debug, Clone)]
pub struct ConsensusProblem {
    views: Vec<PreparedView>,
    n: usize,
}

impl ConsensusProblem {
    /// Free embeddings: each `Y_v` ranges over all `d_v x N` matrices.
    pub fn new(specs: &[ManifoldSpec]) -> Result<Self> {
        let n = Self::check_specs(specs)?;
        let views = specs
            .iter()
            .map(|s| {
                let c = s.c.as_matrix().cloned();
                let whitener = match &c {
                    None => Whitener::identity(n),
                    Some(c) => Whitener::new(c)?,
                };
                Ok(PreparedView {
                    m_reduced: s.minimize_form(),
                    m: s.minimize_form(),
                    c,
                    basis: None,
                    whitener,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { views, n })
    }

    /// Embeddings restricted to `Y_v = Q_vᵀ B_v` for full-row-rank bases `B_v` (r_v x N).
    pub(crate) fn with_bases(specs: &[ManifoldSpec], bases: Vec<Matrix>) -> Result<Self> {
        let n = Self::check_specs(specs)?;
        if bases.len() != specs.len() {
            return Err(Error::DimensionMismatch {
                context: "feature bases",
                expected: specs.len(),
                found: bases.len(),
            });
        }
        let views = specs
            .iter()
            .zip(bases)
            .enumerate()
            .map(|(view, (s, b))| {
                if b.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        context: "feature basis columns",
                        expected: n,
                        found: b.ncols(),
                    });
                }
                let m = s.minimize_form();
                let c = s.c.as_matrix().cloned();
                let mut bcb = match &c {
                    None => &b * b.transpose(),
                    Some(c) => &b * c * b.transpose(),
                };
                linalg::symmetrize(&mut bcb);
                let whitener = Whitener::new(&bcb).map_err(|_| Error::RankDeficientGram { view })?;
                let mut m_reduced = &b * &m * b.transpose();
                linalg::symmetrize(&mut m_reduced);
                Ok(PreparedView {
                    m,
                    c,
                    basis: Some(b),
                    m_reduced,
                    whitener,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { views, n })
    }

    fn check_specs(specs: &[ManifoldSpec]) -> Result<usize> {
        let first = specs.first().ok_or_else(|| Error::InvalidParameter("at least one view is required".into()))?;
        let n = first.n();
        for s in specs {
            if s.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "samples per view",
                    expected: n,
                    found: s.n(),
                });
            }
        }
        Ok(n)
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    fn validate(&self, hp: &Hyperparams) -> Result<()> {
        hp.validate(self.views.len(), self.n)?;
        for (v, view) in self.views.iter().enumerate() {
            if hp.dims[v] > view.rank() {
                return Err(Error::DimensionTooLarge {
                    requested: hp.dims[v],
                    available: view.rank(),
                });
            }
        }
        Ok(())
    }

    /// Smallest-`d` solve of the pencil `(a_reduced, B C Bᵀ)`; returns `(Q, Y)`.
    fn solve(&self, v: usize, a_reduced: &Matrix, d: usize) -> Result<(Matrix, Matrix)> {
        let view = &self.views[v];
        let q = view.whitener.extreme(a_reduced, d, Side::Smallest)?.vectors;
        let y = match &view.basis {
            Some(b) => q.tr_mul(b),
            None => q.transpose(),
        };
        Ok((q, y))
    }

    /// Minimizer of view `v`'s own problem, ignoring every other view.
    pub fn single_view(&self, v: usize, d: usize) -> Result<Matrix> {
        Ok(self.solve(v, &self.views[v].m_reduced, d)?.1)
    }

    /// Uniform weights, single-view embeddings and (centroid scheme) the centroid.
    pub fn init(&self, hp: &Hyperparams, scheme: Scheme) -> Result<ConsensusState> {
        self.validate(hp)?;
        let m = self.views.len();
        let mut coefficients = Vec::with_capacity(m);
        let mut embeddings = Vec::with_capacity(m);
        let mut grams = Vec::with_capacity(m);
        for v in 0..m {
            let (q, y) = self.solve(v, &self.views[v].m_reduced, hp.dims[v])?;
            grams.push(gram(&y));
            embeddings.push(y);
            coefficients.push(q);
        }
        let mut state = ConsensusState {
            embeddings,
            grams,
            centroid: None,
            alpha: vec![1.0 / m as f64; m],
            iteration: 0,
            objective_trace: Vec::new(),
            coefficients,
        };
        if scheme == Scheme::Centroid {
            self.update_centroid(&mut state, hp)?;
        }
        Ok(state)
    }

    fn set_view(&self, state: &mut ConsensusState, v: usize, q: Matrix, y: Matrix) {
        state.grams[v] = gram(&y);
        state.embeddings[v] = y;
        state.coefficients[v] = q;
    }

    fn pencil(&self, state: &ConsensusState, v: usize, hp: &Hyperparams, peers: &[&Matrix]) -> Matrix {
        let view = &self.views[v];
        let mut a = &view.m_reduced * libm::pow(state.alpha[v], hp.r);
        if hp.lambda != 0.0 {
            for y in peers {
                let p = view.project(y);
                a.gemm(-hp.lambda, &p, &p.transpose(), 1.0);
            }
        }
        linalg::symmetrize(&mut a);
        a
    }

    /// Pairwise update of `Y_v`: smallest eigenvectors of
    /// `((α_v)^r M_v − λ Σ_{w≠v} K_w, C_v)`, using the current peers.
    pub fn pairwise_update_view(&self, state: &mut ConsensusState, v: usize, hp: &Hyperparams) -> Result<()> {
        let peers: Vec<&Matrix> = state
            .embeddings
            .iter()
            .enumerate()
            .filter(|(w, _)| *w != v)
            .map(|(_, y)| y)
            .collect();
        let a = self.pencil(state, v, hp, &peers);
        let (q, y) = self.solve(v, &a, hp.dims[v])?;
        self.set_view(state, v, q, y);
        Ok(())
    }

    /// Centroid update of `Y_v`: smallest eigenvectors of `((α_v)^r M_v − λ K_*, C_v)`.
    pub fn centroid_update_view(&self, state: &mut ConsensusState, v: usize, hp: &Hyperparams) -> Result<()> {
        let centroid = state
            .centroid
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("centroid update needs a centroid embedding".into()))?;
        let a = self.pencil(state, v, hp, &[centroid]);
        let (q, y) = self.solve(v, &a, hp.dims[v])?;
        self.set_view(state, v, q, y);
        Ok(())
    }

    /// `Y_*` = top-`d_*` eigenvectors of `Σ_v K_v`.
    pub fn update_centroid(&self, state: &mut ConsensusState, hp: &Hyperparams) -> Result<()> {
        state.centroid = Some(centroid_embedding(&state.grams, hp.centroid_dim)?);
        Ok(())
    }

    /// `tr(Y_v M_v Y_vᵀ)` per view, with the minimize-form `M_v`.
    pub fn view_traces(&self, state: &ConsensusState) -> Vec<f64> {
        self.views
            .iter()
            .zip(&state.embeddings)
            .map(|(view, y)| (y * &view.m).component_mul(y).sum())
            .collect()
    }

    pub fn update_weights(&self, state: &mut ConsensusState, hp: &Hyperparams) -> Result<()> {
        state.alpha = update_alpha(&self.view_traces(state), hp.r, hp.gamma)?;
        Ok(())
    }

    fn weighted_terms(&self, state: &ConsensusState, hp: &Hyperparams) -> f64 {
        self.view_traces(state)
            .iter()
            .zip(&state.alpha)
            .map(|(t, a)| libm::pow(*a, hp.r) * (t + hp.gamma))
            .sum()
    }

    pub fn objective_pairwise(&self, state: &ConsensusState, hp: &Hyperparams) -> f64 {
        let ys = &state.embeddings;
        let mut consensus = 0.0;
        for v in 0..ys.len() {
            for w in (v + 1)..ys.len() {
                consensus += cross_similarity(&ys[v], &ys[w]);
            }
        }
        self.weighted_terms(state, hp) - hp.lambda * consensus
    }

    pub fn objective_centroid(&self, state: &ConsensusState, hp: &Hyperparams) -> f64 {
        let consensus: f64 = match &state.centroid {
            Some(c) => state.embeddings.iter().map(|y| cross_similarity(y, c)).sum(),
            None => 0.0,
        };
        self.weighted_terms(state, hp) - hp.lambda * consensus
    }

    pub fn objective(&self, state: &ConsensusState, hp: &Hyperparams, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Pairwise => self.objective_pairwise(state, hp),
            Scheme::Centroid => self.objective_centroid(state, hp),
        }
    }

    /// `‖Y_v C_v Y_vᵀ − I‖_F` per view.
    pub fn residuals(&self, state: &ConsensusState) -> Vec<f64> {
        self.views
            .iter()
            .zip(&state.embeddings)
            .map(|(view, y)| constraint_residual(y, view.c.as_ref()))
            .collect()
    }

    fn record(&self, state: &ConsensusState, objective: f64) -> TraceRecord {
        TraceRecord {
            iteration: state.iteration,
            objective,
            residuals: self.residuals(state),
            centroid_residual: state.centroid.as_ref().map(|c| constraint_residual(c, None)),
            alpha: state.alpha.clone(),
        }
    }

    /// Gauss–Seidel alternation until the objective change drops below
    /// `rel_tol · (1 + |previous|)` or `max_iters` sweeps have run.
    pub fn run(&self, hp: &Hyperparams, scheme: Scheme) -> Result<EmbeddingResult> {
        let mut state = self.init(hp, scheme)?;
        let mut previous = self.objective(&state, hp, scheme);
        state.objective_trace.push(previous);
        let mut trace = vec![self.record(&state, previous)];
        let mut converged = false;
        while state.iteration < hp.max_iters {
            if scheme == Scheme::Centroid {
                self.update_centroid(&mut state, hp)?;
            }
            for v in 0..self.views.len() {
                match scheme {
                    Scheme::Pairwise => self.pairwise_update_view(&mut state, v, hp)?,
                    Scheme::Centroid => self.centroid_update_view(&mut state, v, hp)?,
                }
            }
            self.update_weights(&mut state, hp)?;
            state.iteration += 1;
            let objective = self.objective(&state, hp, scheme);
            state.objective_trace.push(objective);
            trace.push(self.record(&state, objective));
            let settled = libm::fabs(objective - previous) <= hp.rel_tol * (1.0 + libm::fabs(previous));
            previous = objective;
            if settled {
                converged = true;
                break;
            }
        }
        let residuals = self.residuals(&state);
        Ok(EmbeddingResult {
            scheme,
            iterations_used: state.iteration,
            objective_trace: state.objective_trace.clone(),
            converged,
            trace,
            residuals,
            state,
        })
    }
}

/// `tr(K_a K_b) = ‖Y_a Y_bᵀ‖_F²` without forming the N x N similarities.
fn cross_similarity(ya: &Matrix, yb: &Matrix) -> f64 {
    (ya * yb.transpose()).norm_squared()
}

/// Algorithm with pairwise consensus on free embeddings.
pub fn run_pairwise(specs: &[ManifoldSpec], hp: &Hyperparams) -> Result<EmbeddingResult> {
    ConsensusProblem::new(specs)?.run(hp, Scheme::Pairwise)
}

/// Algorithm with centroid consensus on free embeddings; the centroid is the primary output.
pub fn run_centroid(specs: &[ManifoldSpec], hp: &Hyperparams) -> Result<EmbeddingResult> {
    ConsensusProblem::new(specs)?.run(hp, Scheme::Centroid)
}
