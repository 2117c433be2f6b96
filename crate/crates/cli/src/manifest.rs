//! Dataset manifests: a versioned JSON file naming one CSV per view.

use std::path::{Path, PathBuf};

use mvcon_core::{Constraint, Kernel, ManifoldSpec, Matrix, Sense, ViewDataset};
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub name: String,
    pub views: Vec<ViewEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomEntry>,
}

/// Kernel used by kernel-extension fits of this view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelDescriptor {
    Linear,
    /// `sigma` defaults to the median pairwise distance of the view.
    Rbf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Polynomial {
        degree: u32,
        #[serde(default = "one")]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl KernelDescriptor {
    pub fn resolve(&self, x: &Matrix) -> Kernel {
        match *self {
            KernelDescriptor::Linear => Kernel::Linear,
            KernelDescriptor::Rbf { sigma: Some(sigma) } => Kernel::Rbf { sigma },
            KernelDescriptor::Rbf { sigma: None } => Kernel::rbf_median(x),
            KernelDescriptor::Polynomial { degree, offset } => Kernel::Polynomial { degree, offset },
        }
    }
}

/// A user-supplied `(M, C)` pair for the `custom` method; `C` defaults to `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomEntry {
    pub m: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<PathBuf>,
    #[serde(default = "minimize")]
    pub sense: SenseName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseName {
    Minimize,
    Maximize,
}

fn minimize() -> SenseName {
    SenseName::Minimize
}

/// A manifest with every referenced file read and cross-checked.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub dataset: ViewDataset,
    /// Whether a labels file was given; without one every label is 0.
    pub has_labels: bool,
    /// Original label value of each dense class index.
    pub label_values: Vec<i64>,
    pub custom_specs: Vec<Option<ManifoldSpec>>,
}

impl LoadedManifest {
    pub fn kernel(&self, view: usize) -> Option<Kernel> {
        self.manifest.views[view]
            .kernel
            .map(|k| k.resolve(&self.dataset.views[view]))
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn square(path: &Path, n: usize) -> Result<Matrix> {
    let m = csvio::read_matrix(path)?;
    if m.nrows() != n || m.ncols() != n {
        return Err(CliError::InconsistentSampleCount {
            file: path.to_path_buf(),
            expected: n,
            found: if m.ncols() != n { m.ncols() } else { m.nrows() },
        });
    }
    Ok(m.transpose())
}

pub fn parse_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        file: path.to_path_buf(),
        line: e.line() as u64,
        column: e.column(),
        message: e.to_string(),
    })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported format_version {} (expected {FORMAT_VERSION})",
            path.display(),
            manifest.format_version
        )));
    }
    if manifest.views.is_empty() {
        return Err(CliError::Config(format!("{}: manifest lists no views", path.display())));
    }
    Ok(manifest)
}

/// Read a manifest and every file it references; relative paths are taken
/// from the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<LoadedManifest> {
    let manifest = parse_manifest(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut views = Vec::with_capacity(manifest.views.len());
    let mut n = None;
    for entry in &manifest.views {
        let file = resolve(base, &entry.path);
        let x = csvio::read_matrix(&file)?;
        let expected = *n.get_or_insert(x.ncols());
        if x.ncols() != expected {
            return Err(CliError::InconsistentSampleCount { file, expected, found: x.ncols() });
        }
        views.push(x);
    }
    let n = n.unwrap_or(0);
    let (labels, label_values, has_labels) = match &manifest.labels {
        Some(p) => {
            let file = resolve(base, p);
            let (labels, values) = csvio::read_labels(&file)?;
            if labels.len() != n {
                return Err(CliError::InconsistentSampleCount { file, expected: n, found: labels.len() });
            }
            (labels, values, true)
        }
        None => (vec![0; n], vec![0], false),
    };
    let mut custom_specs = Vec::with_capacity(views.len());
    for entry in &manifest.views {
        custom_specs.push(match &entry.custom {
            Some(custom) => {
                let m = square(&resolve(base, &custom.m), n)?;
                let c = match &custom.c {
                    Some(c) => Constraint::Matrix(square(&resolve(base, c), n)?),
                    None => Constraint::Identity,
                };
                let sense = match custom.sense {
                    SenseName::Minimize => Sense::Minimize,
                    SenseName::Maximize => Sense::Maximize,
                };
                Some(ManifoldSpec::custom(m, c, sense)?)
            }
            None => None,
        });
    }
    let names = manifest.views.iter().map(|v| v.name.clone()).collect();
    let dataset = ViewDataset::new(views, labels, names)?;
    Ok(LoadedManifest { manifest, dataset, has_labels, label_values, custom_specs })
}
