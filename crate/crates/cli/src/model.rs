//! On-disk form of fitted projection and kernel models.

use std::path::Path;

use mvcon_core::{Kernel, Matrix};
use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, RunConfig};
use crate::csvio;
use crate::error::{CliError, Result};
use crate::manifest::KernelDescriptor;

pub const MODEL_VERSION: u32 = 1;
pub const MODEL_FILE: &str = "model.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub kind: ModelKind,
    pub config: RunConfig,
    pub view_names: Vec<String>,
    /// Feature dimension of each view.
    pub input_dims: Vec<usize>,
    /// Embedding dimension of each view.
    pub dims: Vec<usize>,
    /// Training sample count; the row count of kernel coefficients.
    pub n_train: usize,
    pub alpha: Vec<f64>,
    /// Kernel of each view with every parameter resolved (kernel models only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kernels: Vec<KernelDescriptor>,
}

pub fn descriptor(kernel: &Kernel) -> Result<KernelDescriptor> {
    match *kernel {
        Kernel::Linear => Ok(KernelDescriptor::Linear),
        Kernel::Rbf { sigma } => Ok(KernelDescriptor::Rbf { sigma: Some(sigma) }),
        Kernel::Polynomial { degree, offset } => Ok(KernelDescriptor::Polynomial { degree, offset }),
        Kernel::Precomputed => Err(CliError::Config("precomputed kernels cannot be saved".into())),
    }
}

pub fn projection_file(v: usize) -> String {
    format!("projection_{v}.csv")
}

pub fn coefficients_file(v: usize) -> String {
    format!("coefficients_{v}.csv")
}

pub fn train_features_file(v: usize) -> String {
    format!("train_features_{v}.csv")
}

/// A matrix written with [`csvio::matrix_bytes`], read back unchanged.
pub fn read_plain(path: &Path) -> Result<Matrix> {
    Ok(csvio::read_matrix(path)?.transpose())
}

pub fn load(dir: &Path) -> Result<ModelFile> {
    let path = dir.join(MODEL_FILE);
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    let model: ModelFile = serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
    if model.format_version != MODEL_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported model format_version {}",
            path.display(),
            model.format_version
        )));
    }
    Ok(model)
}

/// Embed new samples (`D_v x N'` per view) with a saved model directory.
pub fn project(dir: &Path, model: &ModelFile, xs: &[Matrix]) -> Result<Vec<Matrix>> {
    if xs.len() != model.dims.len() {
        return Err(CliError::Config(format!(
            "model has {} views, data has {}",
            model.dims.len(),
            xs.len()
        )));
    }
    let mut out = Vec::with_capacity(xs.len());
    for (v, x) in xs.iter().enumerate() {
        if x.nrows() != model.input_dims[v] {
            return Err(CliError::Config(format!(
                "view {v}: model expects {} features, data has {}",
                model.input_dims[v],
                x.nrows()
            )));
        }
        let y = match model.kind {
            ModelKind::Subspace => read_plain(&dir.join(projection_file(v)))?.tr_mul(x),
            ModelKind::Kernel => {
                let beta = read_plain(&dir.join(coefficients_file(v)))?;
                let train = csvio::read_matrix(&dir.join(train_features_file(v)))?;
                let kernel = model.kernels[v].resolve(&train);
                beta.tr_mul(&kernel.matrix(&train, x)?)
            }
        };
        out.push(y);
    }
    Ok(out)
}
