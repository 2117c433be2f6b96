//! Similarity-consensus regularized multi-view dimension reduction.
//!
//! Every view contributes a quadratic problem `min tr(Y M Yᵀ)` subject to
//! `Y C Yᵀ = I` ([`ManifoldSpec`]). The views are coupled by rewarding
//! agreement of their linear-kernel similarity matrices `K = YᵀY`, either
//! between every pair of views ([`Scheme::Pairwise`]) or between each view and
//! a shared centroid embedding ([`Scheme::Centroid`]). View weights are learned
//! in closed form. [`extensions`] lifts both schemes to explicit linear
//! projections and to kernel expansions, and [`eval`] provides the
//! split / 1NN / aggregate protocol used to score embeddings.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
#[macro_use]
extern crate std;

mod eigen;
mod error;

pub mod consensus;
pub mod eval;
pub mod extensions;
pub mod graph;
pub mod kernel;
pub mod linalg;
pub mod problem;
pub mod seed;
pub mod synthetic;
#[cfg(test)]
mod testutil;

pub use consensus::{
    consensus_similarity, run_centroid, run_pairwise, update_alpha, ConsensusProblem,
    ConsensusState, EmbeddingResult, Hyperparams, Scheme, TraceRecord,
};
pub use error::{Error, Result};
pub use eval::{
    knn1_classify, run_trials, stratified_split, EmbedConfig, EvalMode, SplitMode, TrialConfig,
    TrialReport, ViewDataset,
};
pub use extensions::{
    apply_kernel, apply_projection, kernel_consensus, subspace_consensus, KernelInput, KernelModel,
    ProjectionModel,
};
pub use kernel::Kernel;
pub use linalg::{gen_eig_extreme, gram, sym_eig, trace_form, Matrix, Side, SymEig};
pub use problem::{Bandwidth, Constraint, ManifoldSpec, Method, Sense, ViewMethod};
pub use synthetic::{make_synthetic_multiview, SyntheticConfig};
