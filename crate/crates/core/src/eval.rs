//! Evaluation protocol: random splits, 1NN classification, mean/max accuracy.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::consensus::{ConsensusProblem, EmbeddingResult, Hyperparams, Scheme};
use crate::error::{Error, Result};
use crate::extensions::{apply_projection, subspace_consensus};
use crate::linalg::Matrix;
use crate::problem::{ManifoldSpec, ViewMethod};
use crate::seed::derive_seed;

/// Views of a common sample set; every view is `D_v x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewDataset {
    pub views: Vec<Matrix>,
    pub labels: Vec<usize>,
    pub names: Vec<String>,
}

impl ViewDataset {
    pub fn new(views: Vec<Matrix>, labels: Vec<usize>, names: Vec<String>) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::InvalidParameter("a dataset needs at least one view".into()))?;
        let n = first.ncols();
        for x in &views {
            if x.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "samples per view",
                    expected: n,
                    found: x.ncols(),
                });
            }
            crate::linalg::check_finite(x)?;
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "labels",
                expected: n,
                found: labels.len(),
            });
        }
        if names.len() != views.len() {
            return Err(Error::DimensionMismatch {
                context: "view names",
                expected: views.len(),
                found: names.len(),
            });
        }
        Ok(Self { views, labels, names })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |c| c + 1)
    }

    pub fn select_views(&self, views: &[usize]) -> Result<Self> {
        if let Some(&bad) = views.iter().find(|&&v| v >= self.n_views()) {
            return Err(Error::InvalidParameter(format!("view index {bad} out of range")));
        }
        Self::new(
            views.iter().map(|&v| self.views[v].clone()).collect(),
            self.labels.clone(),
            views.iter().map(|&v| self.names[v].clone()).collect(),
        )
    }

    pub fn select_samples(&self, samples: &[usize]) -> Self {
        Self {
            views: self.views.iter().map(|x| x.select_columns(samples)).collect(),
            labels: samples.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Per-class proportional split.
    Stratified,
    Uniform,
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("train ratio must lie in (0, 1), got {ratio}")))
    }
}

fn round_half_up(x: f64) -> usize {
    libm::floor(x + 0.5) as usize
}

/// Per-class proportional split of `round(ratio · N)` training samples.
///
/// Class quotas `ratio · N_c` are floored and the remaining slots go to the
/// largest fractional parts (ties to the smaller class). Every class keeps at
/// least one training and one test sample. Both index lists are sorted.
pub fn stratified_split(labels: &[usize], train_ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_ratio(train_ratio)?;
    let classes = labels.iter().copied().max().map_or(0, |c| c + 1);
    let mut members = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let present: Vec<usize> = (0..classes).filter(|&c| !members[c].is_empty()).collect();
    if let Some(&class) = present.iter().find(|&&c| members[c].len() < 2) {
        return Err(Error::ClassTooSmall { class, count: 1 });
    }
    let total = round_half_up(train_ratio * labels.len() as f64);
    let mut quota: Vec<usize> = vec![0; classes];
    let mut fractions: Vec<(f64, usize)> = Vec::with_capacity(present.len());
    for &c in &present {
        let exact = train_ratio * members[c].len() as f64;
        quota[c] = libm::floor(exact) as usize;
        fractions.push((exact - quota[c] as f64, c));
    }
    fractions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let assigned: usize = quota.iter().sum();
    for &(_, c) in fractions.iter().take(total.saturating_sub(assigned)) {
        quota[c] += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(total);
    let mut test = Vec::with_capacity(labels.len() - total.min(labels.len()));
    for &c in &present {
        let mut idx = members[c].clone();
        idx.shuffle(&mut rng);
        let k = quota[c].clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Uniform random split of `round(ratio · N)` training samples (at least one on each side).
pub fn uniform_split(n: usize, train_ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_ratio(train_ratio)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("cannot split {n} samples")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = round_half_up(train_ratio * n as f64).clamp(1, n - 1);
    let mut train = idx[..k].to_vec();
    let mut test = idx[k..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(labels: &[usize], train_ratio: f64, mode: SplitMode, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    match mode {
        SplitMode::Stratified => stratified_split(labels, train_ratio, seed),
        SplitMode::Uniform => uniform_split(labels.len(), train_ratio, seed),
    }
}

/// Label each test column with the label of its nearest training column
/// (Euclidean; ties go to the smaller training index).
pub fn knn1_classify(train: &Matrix, train_labels: &[usize], test: &Matrix) -> Result<Vec<usize>> {
    if train.ncols() == 0 {
        return Err(Error::EmptyTrainSet);
    }
    if train_labels.len() != train.ncols() {
        return Err(Error::DimensionMismatch {
            context: "training labels",
            expected: train.ncols(),
            found: train_labels.len(),
        });
    }
    if train.nrows() != test.nrows() {
        return Err(Error::DimensionMismatch {
            context: "embedding dimension",
            expected: train.nrows(),
            found: test.nrows(),
        });
    }
    Ok(test
        .column_iter()
        .map(|q| {
            let mut best = (f64::INFINITY, 0usize);
            for (j, t) in train.column_iter().enumerate() {
                let d = (t - q).norm_squared();
                if d < best.0 {
                    best = (d, j);
                }
            }
            train_labels[best.1]
        })
        .collect())
}

fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// How to embed a dataset: the scheme, one builder per view, hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub scheme: Scheme,
    pub methods: Vec<ViewMethod>,
    pub hp: Hyperparams,
}

impl EmbedConfig {
    pub fn specs(&self, ds: &ViewDataset) -> Result<Vec<ManifoldSpec>> {
        if self.methods.len() != ds.n_views() {
            return Err(Error::DimensionMismatch {
                context: "view methods",
                expected: ds.n_views(),
                found: self.methods.len(),
            });
        }
        self.methods
            .iter()
            .zip(&ds.views)
            .map(|(m, x)| m.build(x, &ds.labels))
            .collect()
    }

    /// Embed every sample of `ds` with the free-embedding optimizer.
    pub fn embed(&self, ds: &ViewDataset) -> Result<EmbeddingResult> {
        ConsensusProblem::new(&self.specs(ds)?)?.run(&self.hp, self.scheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Embed train and test samples jointly without labels, then split the embedding.
    Transductive,
    /// Learn projections on the training samples and project the test samples.
    OutOfSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub embed: EmbedConfig,
    pub train_ratio: f64,
    pub split: SplitMode,
    pub eval: EvalMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub accuracies: Vec<f64>,
    pub seeds: Vec<u64>,
    pub train_sizes: Vec<usize>,
    pub test_sizes: Vec<usize>,
    pub mean: f64,
    pub max: f64,
    pub master_seed: u64,
    pub config: TrialConfig,
}

fn stack(parts: &[Matrix]) -> Matrix {
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let cols = parts.first().map_or(0, |p| p.ncols());
    let mut out = Matrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.view_mut((at, 0), (p.nrows(), cols)).copy_from(p);
        at += p.nrows();
    }
    out
}

/// Repeated random-split evaluation; trial `i` uses `derive_seed(seed, i)`.
///
/// Transductive mode embeds once (the embedding never sees labels) and
/// rescores it on each split; label-based builders are rejected there. In
/// out-of-sample mode each trial fits projections on its training split and
/// classifies the stacked per-view projections of the test samples.
pub fn run_trials(ds: &ViewDataset, cfg: &TrialConfig, trials: usize, seed: u64) -> Result<TrialReport> {
    check_ratio(cfg.train_ratio)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let transductive = match cfg.eval {
        EvalMode::Transductive => {
            if cfg.embed.methods.iter().any(ViewMethod::uses_labels) {
                return Err(Error::InvalidParameter(
                    "label-based methods need out-of-sample evaluation".into(),
                ));
            }
            Some(cfg.embed.embed(ds)?.output())
        }
        EvalMode::OutOfSample => None,
    };
    let mut report = TrialReport {
        accuracies: Vec::with_capacity(trials),
        seeds: Vec::with_capacity(trials),
        train_sizes: Vec::with_capacity(trials),
        test_sizes: Vec::with_capacity(trials),
        mean: 0.0,
        max: 0.0,
        master_seed: seed,
        config: cfg.clone(),
    };
    for t in 0..trials {
        let trial_seed = derive_seed(seed, t as u64);
        let (train, test) = split(&ds.labels, cfg.train_ratio, cfg.split, trial_seed)?;
        let train_labels: Vec<usize> = train.iter().map(|&i| ds.labels[i]).collect();
        let test_labels: Vec<usize> = test.iter().map(|&i| ds.labels[i]).collect();
        let (train_emb, test_emb) = match &transductive {
            Some(emb) => (emb.select_columns(&train), emb.select_columns(&test)),
            None => {
                let fit = ds.select_samples(&train);
                let specs = cfg.embed.specs(&fit)?;
                let model = subspace_consensus(&fit.views, &specs, &cfg.embed.hp, cfg.embed.scheme)?;
                let held_out: Vec<Matrix> = ds.views.iter().map(|x| x.select_columns(&test)).collect();
                (
                    stack(&model.result.state.embeddings),
                    stack(&apply_projection(&model, &held_out)?),
                )
            }
        };
        let predicted = knn1_classify(&train_emb, &train_labels, &test_emb)?;
        report.accuracies.push(accuracy(&predicted, &test_labels));
        report.seeds.push(trial_seed);
        report.train_sizes.push(train.len());
        report.test_sizes.push(test.len());
    }
    report.mean = report.accuracies.iter().sum::<f64>() / trials as f64;
    report.max = report.accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{make_synthetic_multiview, SyntheticConfig};
    use nalgebra::dmatrix;

    #[test]
    fn balanced_split_counts() {
        let labels = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let (train, test) = stratified_split(&labels, 0.7, 3).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        for c in 0..2 {
            assert!(train.iter().filter(|&&i| labels[i] == c).count() >= 3);
        }
        assert_eq!(stratified_split(&labels, 0.7, 3).unwrap(), (train, test));
    }

    #[test]
    fn split_counting_audit() {
        // 1000 samples over 7 unequal classes
        let labels: Vec<usize> = (0..1000).map(|i| (i * i + 3 * i) % 7).collect();
        for s in 0..30 {
            let (train, test) = stratified_split(&labels, 0.7, derive_seed(5, s)).unwrap();
            assert_eq!(train.len(), 700);
            assert_eq!(train.len() + test.len(), 1000);
            for c in 0..7 {
                let n_c = labels.iter().filter(|&&l| l == c).count() as f64;
                let got = train.iter().filter(|&&i| labels[i] == c).count() as f64;
                assert!((got - 0.7 * n_c).abs() <= 1.0, "class {c}: {got} of {n_c}");
            }
        }
    }

    #[test]
    fn split_errors() {
        assert!(matches!(stratified_split(&[0, 0, 1], 0.5, 0), Err(Error::ClassTooSmall { class: 1, .. })));
        assert!(stratified_split(&[0, 0, 1, 1], 1.5, 0).is_err());
        assert!(stratified_split(&[0, 0, 1, 1], 0.0, 0).is_err());
        let (tr, te) = uniform_split(10, 0.7, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
    }

    #[test]
    fn nearest_neighbour_rules() {
        let train = dmatrix![0.0, 2.0, 5.0];
        assert_eq!(knn1_classify(&train, &[7, 8, 9], &dmatrix![5.0]).unwrap(), vec![9]);
        // 1.0 is equidistant from 0.0 and 2.0
        assert_eq!(knn1_classify(&train, &[7, 8, 9], &dmatrix![1.0]).unwrap(), vec![7]);
        assert_eq!(knn1_classify(&Matrix::zeros(1, 0), &[], &dmatrix![1.0]), Err(Error::EmptyTrainSet));
    }

    #[test]
    fn nearest_neighbour_matches_argmin() {
        let ds = make_synthetic_multiview(&SyntheticConfig::new(10, 3, 2, vec![2], 0.8, 4)).unwrap();
        let x = &ds.views[0];
        let train: Vec<usize> = (0..20).collect();
        let test: Vec<usize> = (20..30).collect();
        let labels: Vec<usize> = train.iter().map(|&i| ds.labels[i]).collect();
        let got = knn1_classify(&x.select_columns(&train), &labels, &x.select_columns(&test)).unwrap();
        for (k, &t) in test.iter().enumerate() {
            let mut best = 0;
            for &j in &train {
                let d = |a: usize| (x[(0, a)] - x[(0, t)]).powi(2) + (x[(1, a)] - x[(1, t)]).powi(2);
                if d(j) < d(best) {
                    best = j;
                }
            }
            assert_eq!(got[k], ds.labels[best]);
        }
    }

    fn clusters() -> ViewDataset {
        let mut cfg = SyntheticConfig::new(8, 3, 3, vec![5, 4], 0.02, 21);
        cfg.center_scale = 5.0;
        make_synthetic_multiview(&cfg).unwrap()
    }

    fn config(eval: EvalMode) -> TrialConfig {
        TrialConfig {
            embed: EmbedConfig {
                scheme: Scheme::Pairwise,
                methods: vec![ViewMethod::Le { k: 5, bandwidth: crate::Bandwidth::Adaptive }; 2],
                hp: Hyperparams::new(2, 3),
            },
            train_ratio: 0.7,
            split: SplitMode::Stratified,
            eval,
        }
    }

    #[test]
    fn separated_clusters_are_classified_perfectly() {
        let ds = clusters();
        let report = run_trials(&ds, &config(EvalMode::Transductive), 5, 1).unwrap();
        assert!(report.accuracies.iter().all(|&a| a == 1.0), "{:?}", report.accuracies);
        let one = run_trials(&ds, &config(EvalMode::Transductive), 1, 1).unwrap();
        assert_eq!(one.mean, one.max);
    }

    #[test]
    fn trials_are_reproducible() {
        let ds = clusters();
        let a = run_trials(&ds, &config(EvalMode::OutOfSample), 3, 8).unwrap();
        assert_eq!(a, run_trials(&ds, &config(EvalMode::OutOfSample), 3, 8).unwrap());
        assert!(a.mean <= a.max && a.accuracies.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn lda_requires_out_of_sample() {
        let ds = clusters();
        let mut cfg = config(EvalMode::Transductive);
        cfg.embed.methods = vec![ViewMethod::Lda; 2];
        assert!(run_trials(&ds, &cfg, 1, 0).is_err());
    }
}
