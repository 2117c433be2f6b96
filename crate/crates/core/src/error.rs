use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max |A - Aᵀ| = {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("requested {requested} eigenpairs from a problem of size {available}")]
    DimensionTooLarge { requested: usize, available: usize },
    #[error("constraint matrix is not positive definite even after ridge {ridge:e}")]
    CholeskyFailure { ridge: f64 },
    #[error("eigensolver failed to converge")]
    EigenFailure,
    #[error("k = {k} neighbours requested but only {n} samples")]
    KTooLarge { k: usize, n: usize },
    #[error("local Gram matrix of sample {sample} is singular; use a positive ridge")]
    SingularLocalGram { sample: usize },
    #[error("class {class} has no members")]
    EmptyClass { class: usize },
    #[error("class {class} has {count} samples; at least 2 are needed to split")]
    ClassTooSmall { class: usize, count: usize },
    #[error("view {view}: weight denominator tr(Y M Yᵀ) + gamma = {value:e} is not positive")]
    NonPositiveDenominator { view: usize, value: f64 },
    #[error("view {view}: projected constraint matrix is rank deficient")]
    RankDeficientGram { view: usize },
    #[error("view {view}: kernel matrix is not PSD (min eigenvalue {min_eigenvalue:e})")]
    NonPsdKernel { view: usize, min_eigenvalue: f64 },
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
