//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mvcon_core::consensus::{DEFAULT_GAMMA, DEFAULT_LAMBDA, DEFAULT_MAX_ITERS, DEFAULT_R, DEFAULT_REL_TOL};
use mvcon_core::graph::DEFAULT_K;

use crate::commands;
use crate::config::{EvalName, MethodName, ModelKind, RunConfig, SchemeName, SplitName};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "mvcon", version, about = "Similarity-consensus multi-view dimension reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed every sample of a manifest and write embeddings, trace and metadata.
    Embed(RunArgs),
    /// Repeated random-split 1NN evaluation.
    Bench(RunArgs),
    /// Learn projections (or kernel expansions) for later use with `project`.
    Fit(RunArgs),
    /// Embed new samples with a fitted model.
    Project(ProjectArgs),
    /// Merge trace files into one long-format table for plotting.
    TracePlotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemeName::Pairwise)]
    pub scheme: SchemeName,
    /// Builder per view; give once to use it for every view. Default: le.
    #[arg(long = "method", value_enum)]
    pub methods: Vec<MethodName>,
    /// Embedding dimension of every view.
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Centroid dimension; defaults to --dim.
    #[arg(long)]
    pub centroid_dim: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = DEFAULT_R)]
    pub r: f64,
    /// Neighbourhood size for graph-based methods.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = EvalName::Transductive)]
    pub eval: EvalName,
    #[arg(long, value_enum, default_value_t = SplitName::Stratified)]
    pub split: SplitName,
    /// Comma-separated manifest view indices to use.
    #[arg(long, value_delimiter = ',')]
    pub views: Option<Vec<usize>>,
    /// Model family for `fit`.
    #[arg(long, value_enum, default_value_t = ModelKind::Subspace)]
    pub kind: ModelKind,
    /// Output directory, replaced atomically.
    #[arg(long)]
    pub out: PathBuf,
}

impl RunArgs {
    pub fn config(&self, with_kind: bool) -> RunConfig {
        RunConfig {
            manifest: self.manifest.clone(),
            views: self.views.clone(),
            scheme: self.scheme,
            methods: self.methods.clone(),
            k: self.k,
            dim: self.dim,
            centroid_dim: self.centroid_dim.unwrap_or(self.dim),
            lambda: self.lambda,
            gamma: self.gamma,
            r: self.r,
            max_iters: self.max_iters,
            tol: self.tol,
            trials: self.trials,
            train_ratio: self.train_ratio,
            seed: self.seed,
            split: self.split,
            eval: self.eval,
            kind: with_kind.then_some(self.kind),
        }
    }
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Manifest of the samples to embed.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trace files written by `embed` or `fit`.
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed(a) => commands::embed(a.config(false), &a.out),
        Command::Bench(a) => commands::bench(a.config(false), &a.out),
        Command::Fit(a) => commands::fit(a.config(true), &a.out),
        Command::Project(a) => commands::project(&a.model, &a.manifest, &a.out),
        Command::TracePlotdata(a) => commands::trace_plotdata(&a.traces, &a.out),
    }
}
