//! The subcommands. Each validates its configuration, computes everything in
//! memory, stages the output tree and commits it with one rename.

use std::path::{Path, PathBuf};

use mvcon_core::{
    kernel_consensus, run_trials, subspace_consensus, ConsensusProblem, EmbedConfig, EmbeddingResult, Hyperparams,
    KernelInput, ManifoldSpec, Scheme, TrialConfig, ViewDataset, ViewMethod,
};
use serde_json::json;

use crate::config::{MethodName, ModelKind, RunConfig};
use crate::csvio::{self, format_f64};
use crate::error::{CliError, Result};
use crate::manifest::{load_manifest, LoadedManifest};
use crate::model::{self, ModelFile, MODEL_FILE, MODEL_VERSION};
use crate::output::{write_file_atomic, Staging};

pub const METADATA_FILE: &str = "metadata.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const CENTROID_FILE: &str = "centroid.csv";

pub fn embedding_file(v: usize) -> String {
    format!("embedding_{v}.csv")
}

/// A manifest narrowed to the selected views, with methods resolved.
struct Prepared {
    loaded: LoadedManifest,
    dataset: ViewDataset,
    custom: Vec<Option<ManifoldSpec>>,
    view_indices: Vec<usize>,
    hp: Hyperparams,
}

fn prepare(cfg: &mut RunConfig) -> Result<Prepared> {
    cfg.validate_static()?;
    let loaded = load_manifest(&cfg.manifest)?;
    let all = loaded.dataset.n_views();
    let view_indices = match &cfg.views {
        Some(v) if v.is_empty() => return Err(CliError::Config("--views selects no view".into())),
        Some(v) => v.clone(),
        None => (0..all).collect(),
    };
    if let Some(&bad) = view_indices.iter().find(|&&v| v >= all) {
        return Err(CliError::Config(format!("view index {bad} out of range; the manifest has {all} views")));
    }
    let dataset = loaded.dataset.select_views(&view_indices)?;
    let custom = view_indices.iter().map(|&v| loaded.custom_specs[v].clone()).collect();
    cfg.resolve_methods(view_indices.len())?;
    if cfg.methods.contains(&MethodName::Lda) && !loaded.has_labels {
        return Err(CliError::Config("method lda needs a labels file in the manifest".into()));
    }
    let hp = cfg.hyperparams(view_indices.len());
    hp.validate(dataset.n_views(), dataset.n_samples())
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Prepared { loaded, dataset, custom, view_indices, hp })
}

impl Prepared {
    fn specs(&self, cfg: &RunConfig) -> Result<Vec<ManifoldSpec>> {
        let mut specs = Vec::with_capacity(cfg.methods.len());
        for (v, method) in cfg.methods.iter().enumerate() {
            let spec = match method.view_method(cfg.k) {
                Some(builder) => builder.build(&self.dataset.views[v], &self.dataset.labels)?,
                None => self.custom[v].clone().ok_or_else(|| {
                    CliError::Config(format!(
                        "view {} uses method custom but has no custom entry",
                        self.view_indices[v]
                    ))
                })?,
            };
            specs.push(spec);
        }
        Ok(specs)
    }

    fn dataset_json(&self) -> serde_json::Value {
        json!({
            "name": self.loaded.manifest.name,
            "n_samples": self.dataset.n_samples(),
            "n_classes": if self.loaded.has_labels { Some(self.dataset.n_classes()) } else { None },
            "view_indices": self.view_indices,
            "view_names": self.dataset.names,
            "view_dims": self.dataset.views.iter().map(|x| x.nrows()).collect::<Vec<_>>(),
        })
    }
}

fn hyperparams_json(hp: &Hyperparams, scheme: Scheme) -> serde_json::Value {
    json!({
        "lambda": hp.lambda,
        "gamma": hp.gamma,
        "r": hp.r,
        "dims": hp.dims,
        "centroid_dim": if scheme == Scheme::Centroid { Some(hp.centroid_dim) } else { None },
        "max_iters": hp.max_iters,
        "rel_tol": hp.rel_tol,
    })
}

fn result_json(result: &EmbeddingResult) -> serde_json::Value {
    json!({
        "converged": result.converged,
        "iterations_used": result.iterations_used,
        "final_objective": result.objective_trace.last(),
        "alpha": result.alpha(),
        "residuals": result.residuals,
    })
}

fn metadata(command: &str, cfg: &RunConfig, prepared: &Prepared, extra: serde_json::Value) -> serde_json::Value {
    let mut meta = json!({
        "format_version": 1,
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "dataset": prepared.dataset_json(),
        "hyperparams": hyperparams_json(&prepared.hp, cfg.scheme.into()),
    });
    if let (Some(meta), serde_json::Value::Object(extra)) = (meta.as_object_mut(), extra) {
        meta.extend(extra);
    }
    meta
}

/// Trace table: iteration, objective, per-view residuals, centroid residual
/// (empty for pairwise runs), per-view weights.
pub fn trace_bytes(result: &EmbeddingResult) -> Vec<u8> {
    let m = result.alpha().len();
    let mut header = vec!["iteration".to_string(), "objective".to_string()];
    header.extend((0..m).map(|v| format!("residual_{v}")));
    header.push("centroid_residual".into());
    header.extend((0..m).map(|v| format!("alpha_{v}")));
    let rows: Vec<Vec<String>> = result
        .trace
        .iter()
        .map(|t| {
            let mut row = vec![t.iteration.to_string(), format_f64(t.objective)];
            row.extend(t.residuals.iter().map(|&r| format_f64(r)));
            row.push(t.centroid_residual.map(format_f64).unwrap_or_default());
            row.extend(t.alpha.iter().map(|&a| format_f64(a)));
            row
        })
        .collect();
    csvio::table_bytes(&header, &rows)
}

fn stage_embeddings(staging: &Staging, result: &EmbeddingResult) -> Result<()> {
    for (v, y) in result.embeddings().iter().enumerate() {
        staging.write(&embedding_file(v), &csvio::matrix_bytes(y))?;
    }
    if let Some(c) = result.centroid() {
        staging.write(CENTROID_FILE, &csvio::matrix_bytes(c))?;
    }
    staging.write(TRACE_FILE, &trace_bytes(result))
}

pub fn embed(mut cfg: RunConfig, out: &Path) -> Result<()> {
    let prepared = prepare(&mut cfg)?;
    let specs = prepared.specs(&cfg)?;
    let result = ConsensusProblem::new(&specs)?.run(&prepared.hp, cfg.scheme.into())?;
    let staging = Staging::new(out)?;
    stage_embeddings(&staging, &result)?;
    let meta = metadata("embed", &cfg, &prepared, json!({ "result": result_json(&result) }));
    staging.write_json(METADATA_FILE, &meta)?;
    staging.commit()
}

fn builders(cfg: &RunConfig) -> Result<Vec<ViewMethod>> {
    cfg.methods
        .iter()
        .map(|m| {
            m.view_method(cfg.k)
                .ok_or_else(|| CliError::Config("method custom is fixed to one sample set; use embed".into()))
        })
        .collect()
}

pub fn bench(mut cfg: RunConfig, out: &Path) -> Result<()> {
    let prepared = prepare(&mut cfg)?;
    if !prepared.loaded.has_labels {
        return Err(CliError::Config("bench needs a labels file in the manifest".into()));
    }
    let trial = TrialConfig {
        embed: EmbedConfig {
            scheme: cfg.scheme.into(),
            methods: builders(&cfg)?,
            hp: prepared.hp.clone(),
        },
        train_ratio: cfg.train_ratio,
        split: cfg.split.into(),
        eval: cfg.eval.into(),
    };
    let report = run_trials(&prepared.dataset, &trial, cfg.trials, cfg.seed)?;
    let header: Vec<String> = ["trial", "seed", "train_size", "test_size", "accuracy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = (0..report.accuracies.len())
        .map(|t| {
            vec![
                t.to_string(),
                report.seeds[t].to_string(),
                report.train_sizes[t].to_string(),
                report.test_sizes[t].to_string(),
                format_f64(report.accuracies[t]),
            ]
        })
        .collect();
    let n = report.accuracies.len() as f64;
    let std = (report.accuracies.iter().map(|a| (a - report.mean).powi(2)).sum::<f64>() / n).sqrt();
    let min = report.accuracies.iter().copied().fold(f64::INFINITY, f64::min);
    let summary = json!({
        "trials": report.accuracies.len(),
        "master_seed": report.master_seed,
        "mean": report.mean,
        "max": report.max,
        "min": min,
        "std": std,
    });
    let staging = Staging::new(out)?;
    staging.write("trials.csv", &csvio::table_bytes(&header, &rows))?;
    staging.write_json("summary.json", &summary)?;
    staging.write_json(METADATA_FILE, &metadata("bench", &cfg, &prepared, json!({ "summary": summary })))?;
    staging.commit()
}

pub fn fit(mut cfg: RunConfig, out: &Path) -> Result<()> {
    let kind = *cfg.kind.get_or_insert(ModelKind::Subspace);
    let prepared = prepare(&mut cfg)?;
    let specs = prepared.specs(&cfg)?;
    let scheme: Scheme = cfg.scheme.into();
    let ds = &prepared.dataset;
    let staging = Staging::new(out)?;
    let (result, kernels) = match kind {
        ModelKind::Subspace => {
            let model = subspace_consensus(&ds.views, &specs, &prepared.hp, scheme)?;
            for (v, w) in model.projections.iter().enumerate() {
                staging.write(&model::projection_file(v), &csvio::matrix_bytes(w))?;
            }
            (model.result, Vec::new())
        }
        ModelKind::Kernel => {
            let inputs: Vec<KernelInput> = prepared
                .view_indices
                .iter()
                .zip(&ds.views)
                .map(|(&v, x)| KernelInput::Features {
                    x: x.clone(),
                    kernel: prepared.loaded.kernel(v).unwrap_or(mvcon_core::Kernel::Linear),
                })
                .collect();
            let model = kernel_consensus(&inputs, &specs, &prepared.hp, scheme)?;
            for (v, beta) in model.coefficients.iter().enumerate() {
                staging.write(&model::coefficients_file(v), &csvio::matrix_bytes(beta))?;
                staging.write(&model::train_features_file(v), &csvio::matrix_bytes(&ds.views[v].transpose()))?;
            }
            let kernels = model.kernels.iter().map(model::descriptor).collect::<Result<Vec<_>>>()?;
            (model.result, kernels)
        }
    };
    stage_embeddings(&staging, &result)?;
    let file = ModelFile {
        format_version: MODEL_VERSION,
        kind,
        config: cfg.clone(),
        view_names: ds.names.clone(),
        input_dims: ds.views.iter().map(|x| x.nrows()).collect(),
        dims: prepared.hp.dims.clone(),
        n_train: ds.n_samples(),
        alpha: result.alpha().to_vec(),
        kernels,
    };
    staging.write_json(MODEL_FILE, &file)?;
    staging.write_json(METADATA_FILE, &metadata("fit", &cfg, &prepared, json!({ "result": result_json(&result) })))?;
    staging.commit()
}

pub fn project(model_dir: &Path, manifest: &Path, out: &Path) -> Result<()> {
    let file = model::load(model_dir)?;
    let loaded = load_manifest(manifest)?;
    let views = match &file.config.views {
        Some(v) => loaded.dataset.select_views(v)?,
        None => loaded.dataset.clone(),
    };
    let ys = model::project(model_dir, &file, &views.views)?;
    let staging = Staging::new(out)?;
    for (v, y) in ys.iter().enumerate() {
        staging.write(&embedding_file(v), &csvio::matrix_bytes(y))?;
    }
    let meta = json!({
        "format_version": 1,
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": "project",
        "model": model_dir,
        "manifest": manifest,
        "n_samples": views.n_samples(),
    });
    staging.write_json(METADATA_FILE, &meta)?;
    staging.commit()
}

/// Merge trace files into one long table `run_id,iteration,objective`, where
/// `run_id` is the position of the input file on the command line.
pub fn trace_plotdata(inputs: &[PathBuf], out: &Path) -> Result<()> {
    if inputs.is_empty() {
        return Err(CliError::Config("trace-plotdata needs at least one trace file".into()));
    }
    let mut rows = Vec::new();
    for (run, path) in inputs.iter().enumerate() {
        let (header, records) = csvio::read_table(path)?;
        let column = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| CliError::Parse {
                file: path.clone(),
                line: 1,
                column: header.len() + 1,
                message: format!("missing column {name:?}"),
            })
        };
        let (it, obj) = (column("iteration")?, column("objective")?);
        for (line, record) in records {
            let cell = |c: usize| record.get(c).map(String::as_str).unwrap_or("");
            let parse_err = |c: usize| CliError::Parse {
                file: path.clone(),
                line,
                column: c + 1,
                message: format!("bad value {:?}", cell(c)),
            };
            let iteration: u64 = cell(it).parse().map_err(|_| parse_err(it))?;
            let objective: f64 = cell(obj).parse().map_err(|_| parse_err(obj))?;
            rows.push(vec![run.to_string(), iteration.to_string(), format_f64(objective)]);
        }
    }
    let header: Vec<String> = ["run_id", "iteration", "objective"].iter().map(|s| s.to_string()).collect();
    write_file_atomic(out, &csvio::table_bytes(&header, &rows))
}
