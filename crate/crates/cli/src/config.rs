//! Run configuration shared by the commands, echoed into every metadata file.

use std::path::PathBuf;

use clap::ValueEnum;
use mvcon_core::eval::SplitMode;
use mvcon_core::{EvalMode, Hyperparams, Scheme, ViewMethod};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Pairwise,
    Centroid,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Pairwise => Scheme::Pairwise,
            SchemeName::Centroid => Scheme::Centroid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Lle,
    Le,
    Pca,
    Npe,
    Lda,
    /// `(M, C)` read from the manifest's `custom` entry for the view.
    Custom,
}

impl MethodName {
    /// The built-in builder, or `None` for `custom`.
    pub fn view_method(self, k: usize) -> Option<ViewMethod> {
        match self {
            MethodName::Lle => Some(ViewMethod::lle().with_k(k)),
            MethodName::Le => Some(ViewMethod::le().with_k(k)),
            MethodName::Npe => Some(ViewMethod::npe().with_k(k)),
            MethodName::Pca => Some(ViewMethod::Pca),
            MethodName::Lda => Some(ViewMethod::Lda),
            MethodName::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SplitName {
    Stratified,
    Uniform,
}

impl From<SplitName> for SplitMode {
    fn from(s: SplitName) -> Self {
        match s {
            SplitName::Stratified => SplitMode::Stratified,
            SplitName::Uniform => SplitMode::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalName {
    Transductive,
    OutOfSample,
}

impl From<EvalName> for EvalMode {
    fn from(e: EvalName) -> Self {
        match e {
            EvalName::Transductive => EvalMode::Transductive,
            EvalName::OutOfSample => EvalMode::OutOfSample,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Subspace,
    Kernel,
}

/// Every setting of a run. The output directory is not part of the closure,
/// so identical runs into different directories write identical metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifest: PathBuf,
    /// Subset of manifest views, by index; `None` uses all of them.
    pub views: Option<Vec<usize>>,
    pub scheme: SchemeName,
    /// One method per selected view.
    pub methods: Vec<MethodName>,
    pub k: usize,
    pub dim: usize,
    pub centroid_dim: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub r: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub trials: usize,
    pub train_ratio: f64,
    pub seed: u64,
    pub split: SplitName,
    pub eval: EvalName,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<ModelKind>,
}

impl RunConfig {
    /// Checks that need no data; run before anything is read.
    pub fn validate_static(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return bad(format!("--train-ratio must lie in (0, 1), got {}", self.train_ratio));
        }
        if self.trials == 0 {
            return bad("--trials must be >= 1".into());
        }
        if self.k == 0 {
            return bad("--k must be >= 1".into());
        }
        // dims and sample counts are checked once the data is known
        let mut hp = self.hyperparams(1);
        hp.dims = vec![1];
        hp.centroid_dim = 1;
        hp.validate(1, 2).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Broadcast a single `--method` to every view; no `--method` means LE.
    pub fn resolve_methods(&mut self, n_views: usize) -> Result<()> {
        self.methods = match self.methods.len() {
            0 => vec![MethodName::Le; n_views],
            1 => vec![self.methods[0]; n_views],
            n if n == n_views => self.methods.clone(),
            n => {
                return Err(CliError::Config(format!(
                    "{n} methods given for {n_views} views; pass one or one per view"
                )))
            }
        };
        Ok(())
    }

    pub fn hyperparams(&self, n_views: usize) -> Hyperparams {
        let mut hp = Hyperparams::new(n_views, self.dim)
            .with_lambda(self.lambda)
            .with_gamma(self.gamma)
            .with_r(self.r);
        hp.centroid_dim = self.centroid_dim;
        hp.max_iters = self.max_iters;
        hp.rel_tol = self.tol;
        hp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            manifest: "m.json".into(),
            views: None,
            scheme: SchemeName::Pairwise,
            methods: vec![],
            k: 10,
            dim: 2,
            centroid_dim: 2,
            lambda: 0.5,
            gamma: 1.0,
            r: 2.0,
            max_iters: 100,
            tol: 1e-6,
            trials: 30,
            train_ratio: 0.7,
            seed: 0,
            split: SplitName::Stratified,
            eval: EvalName::Transductive,
            kind: None,
        }
    }

    #[test]
    fn static_validation() {
        assert!(config().validate_static().is_ok());
        for broken in [
            RunConfig { train_ratio: 1.5, ..config() },
            RunConfig { trials: 0, ..config() },
            RunConfig { r: 1.0, ..config() },
            RunConfig { lambda: -1.0, ..config() },
            RunConfig { tol: 0.0, ..config() },
        ] {
            assert!(matches!(broken.validate_static(), Err(CliError::Config(_))));
        }
    }

    #[test]
    fn methods_broadcast() {
        let mut c = config();
        c.resolve_methods(3).unwrap();
        assert_eq!(c.methods, vec![MethodName::Le; 3]);
        c.methods = vec![MethodName::Lle];
        c.resolve_methods(2).unwrap();
        assert_eq!(c.methods, vec![MethodName::Lle; 2]);
        c.methods = vec![MethodName::Lle, MethodName::Le];
        assert!(c.resolve_methods(3).is_err());
    }
}
