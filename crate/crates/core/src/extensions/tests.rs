use super::*;
use crate::linalg::gram;
use crate::problem::{self, Bandwidth, Constraint, Sense};
use crate::synthetic::{make_synthetic_multiview, SyntheticConfig};
use crate::testutil::{max_abs_diff, random_spec, random_specs, uniform};
use nalgebra::dmatrix;

fn views(n_per_class: usize, dims: Vec<usize>, seed: u64) -> Vec<Matrix> {
    make_synthetic_multiview(&SyntheticConfig::new(n_per_class, 4, 3, dims, 0.4, seed))
        .unwrap()
        .views
}

fn le_specs(xs: &[Matrix]) -> Vec<ManifoldSpec> {
    xs.iter()
        .map(|x| problem::le_spec(x, 8, Bandwidth::Adaptive).unwrap())
        .collect()
}

fn centered(k: &Matrix) -> Matrix {
    let n = k.nrows();
    let h = Matrix::identity(n, n) - Matrix::from_element(n, n, 1.0 / n as f64);
    &h * k * &h
}

#[test]
fn single_view_pca_matches_principal_scores() {
    let x = uniform(6, 25, 1);
    let spec = problem::pca_spec(&x).unwrap();
    // maximize-sense traces are negative, so γ must lift them above zero
    let hp = Hyperparams::new(1, 2).with_lambda(0.0).with_gamma(1e3);
    let model = subspace_consensus(&[x.clone()], &[spec], &hp, Scheme::Pairwise).unwrap();
    let y = &model.result.state.embeddings[0];

    let mean = x.column_mean();
    let xc = Matrix::from_fn(6, 25, |i, j| x[(i, j)] - mean[i]);
    let cov = &xc * xc.transpose();
    let top = crate::linalg::sym_eig(&cov).unwrap();
    let w = top.vectors.columns(4, 2).into_owned();
    let scores = w.transpose() * &xc;
    assert!(max_abs_diff(&centered(&gram(y)), &gram(&scores)) <= 1e-6);
}

#[test]
fn invertible_features_reach_the_free_optimum() {
    let n = 12;
    let x = uniform(n, n, 2);
    let xs = vec![x.clone(), uniform(n, n, 3)];
    let specs = random_specs(n, 2, 4);
    let hp = Hyperparams::new(2, 2).with_lambda(0.4);
    for scheme in [Scheme::Pairwise, Scheme::Centroid] {
        let sub = subspace_consensus(&xs, &specs, &hp, scheme).unwrap();
        let free = ConsensusProblem::new(&specs).unwrap().run(&hp, scheme).unwrap();
        let a = *sub.result.objective_trace.last().unwrap();
        let b = *free.objective_trace.last().unwrap();
        assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn duplicated_views_share_grams() {
    let x = views(8, vec![7], 5).remove(0);
    let xs = vec![x.clone(), x];
    let specs = le_specs(&xs);
    for lambda in [0.0, 0.3, 2.0] {
        // the sweep order breaks the symmetry transiently; it is restored at the fixed point
        let mut hp = Hyperparams::new(2, 3).with_lambda(lambda);
        hp.rel_tol = 1e-15;
        hp.max_iters = 500;
        let model = subspace_consensus(&xs, &specs, &hp, Scheme::Pairwise).unwrap();
        let g = &model.result.state.grams;
        assert!(max_abs_diff(&g[0], &g[1]) <= 1e-8, "{lambda}: {:e} after {}", max_abs_diff(&g[0], &g[1]), model.result.iterations_used);
    }
}

#[test]
fn projection_constraints_and_descent() {
    let xs = views(8, vec![9, 7, 6], 6);
    let specs = le_specs(&xs);
    for scheme in [Scheme::Pairwise, Scheme::Centroid] {
        let model = subspace_consensus(&xs, &specs, &Hyperparams::new(3, 3).with_lambda(0.7), scheme).unwrap();
        assert!(model.result.is_monotone(1e-9));
        for record in &model.result.trace {
            assert!(record.residuals.iter().all(|&r| r <= 1e-6));
        }
        for (v, w) in model.projections.iter().enumerate() {
            let c = specs[v].c.as_matrix().unwrap();
            let constraint = w.transpose() * &xs[v] * c * xs[v].transpose() * w;
            assert!(max_abs_diff(&constraint, &Matrix::identity(3, 3)) <= 1e-6);
        }
        assert!((model.alpha().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn apply_projection_examples() {
    let xs = views(8, vec![9, 7], 7);
    let model = subspace_consensus(&xs, &le_specs(&xs), &Hyperparams::new(2, 2), Scheme::Centroid).unwrap();
    let again = apply_projection(&model, &xs).unwrap();
    for (y, z) in model.result.state.embeddings.iter().zip(&again) {
        assert!(max_abs_diff(y, z) <= 1e-10);
    }
    let zeros = vec![Matrix::zeros(9, 3), Matrix::zeros(7, 3)];
    assert!(apply_projection(&model, &zeros).unwrap().iter().all(|y| y.amax() == 0.0));
    let column: Vec<Matrix> = xs.iter().map(|x| x.columns(5, 1).into_owned()).collect();
    let single = apply_projection(&model, &column).unwrap();
    for (y, z) in again.iter().zip(&single) {
        assert!(max_abs_diff(&y.columns(5, 1).into_owned(), z) <= 1e-12);
    }
    let wrong = vec![Matrix::zeros(8, 1), Matrix::zeros(7, 1)];
    assert!(matches!(apply_projection(&model, &wrong), Err(Error::DimensionMismatch { .. })));
    assert!(apply_projection(&model, &xs[..1]).is_err());
}

#[test]
fn linear_kernel_matches_subspace_path() {
    let xs = views(10, vec![8, 6], 8);
    let specs = le_specs(&xs);
    let hp = Hyperparams::new(2, 3).with_lambda(0.6);
    let inputs: Vec<KernelInput> = xs
        .iter()
        .map(|x| KernelInput::Features { x: x.clone(), kernel: Kernel::Linear })
        .collect();
    for scheme in [Scheme::Pairwise, Scheme::Centroid] {
        let sub = subspace_consensus(&xs, &specs, &hp, scheme).unwrap();
        let ker = kernel_consensus(&inputs, &specs, &hp, scheme).unwrap();
        for (a, b) in sub.result.state.grams.iter().zip(&ker.result.state.grams) {
            assert!(max_abs_diff(a, b) <= 1e-6);
        }
        assert!(ker.result.is_monotone(1e-9));

        // held-out samples: compare cross-similarities to the training embedding
        let fresh = views(2, vec![8, 6], 9);
        let by_projection = apply_projection(&sub, &fresh).unwrap();
        let by_kernel = ker.embed_features(&fresh).unwrap();
        for v in 0..2 {
            let p = sub.result.state.embeddings[v].tr_mul(&by_projection[v]);
            let k = ker.result.state.embeddings[v].tr_mul(&by_kernel[v]);
            assert!(max_abs_diff(&p, &k) <= 1e-6);
        }
    }
}

#[test]
fn kernel_constraints_hold() {
    let xs = views(8, vec![6, 5], 10);
    let specs = le_specs(&xs);
    let inputs: Vec<KernelInput> = xs
        .iter()
        .map(|x| KernelInput::Features { x: x.clone(), kernel: Kernel::rbf_median(x) })
        .collect();
    let model = kernel_consensus(&inputs, &specs, &Hyperparams::new(2, 3), Scheme::Pairwise).unwrap();
    for v in 0..2 {
        let beta = &model.coefficients[v];
        let k = &model.train_kernels[v];
        let c = specs[v].c.as_matrix().unwrap();
        let constraint = beta.transpose() * k * c * k * beta;
        assert!(max_abs_diff(&constraint, &Matrix::identity(3, 3)) <= 1e-6);
    }
    assert!(model.result.is_monotone(1e-9));
}

#[test]
fn identity_kernel_is_the_free_path() {
    let n = 10;
    let specs = vec![random_spec(n, 11), random_spec(n, 12)];
    let hp = Hyperparams::new(2, 2).with_lambda(0.9);
    let inputs = vec![KernelInput::Precomputed(Matrix::identity(n, n)); 2];
    let ker = kernel_consensus(&inputs, &specs, &hp, Scheme::Pairwise).unwrap();
    let free = ConsensusProblem::new(&specs).unwrap().run(&hp, Scheme::Pairwise).unwrap();
    for (a, b) in ker.result.state.grams.iter().zip(&free.state.grams) {
        assert!(max_abs_diff(a, b) <= 1e-8);
    }
}

#[test]
fn apply_kernel_examples() {
    let xs = views(6, vec![5], 13);
    let inputs = vec![KernelInput::Features { x: xs[0].clone(), kernel: Kernel::rbf_median(&xs[0]) }];
    let model = kernel_consensus(&inputs, &le_specs(&xs), &Hyperparams::new(1, 2), Scheme::Pairwise).unwrap();
    let again = apply_kernel(&model, &model.train_kernels).unwrap();
    assert!(max_abs_diff(&again[0], &model.result.state.embeddings[0]) <= 1e-9);
    assert_eq!(apply_kernel(&model, &[Matrix::zeros(24, 4)]).unwrap()[0], Matrix::zeros(2, 4));
    assert!(matches!(apply_kernel(&model, &[Matrix::zeros(23, 4)]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn wide_rbf_kernel_passes_psd_check() {
    let x = uniform(3, 15, 14);
    let k = Kernel::Rbf { sigma: 1e6 }.matrix(&x, &x).unwrap();
    assert!((k.mean() - 1.0).abs() < 1e-9);
    assert!(reduce_kernel(&k, 0).is_ok());
}

#[test]
fn kernel_errors() {
    let spec = random_spec(2, 15);
    let hp = Hyperparams::new(1, 1);
    let indefinite = vec![KernelInput::Precomputed(dmatrix![0.0, 1.0; 1.0, 0.0])];
    assert!(matches!(
        kernel_consensus(&indefinite, &[spec.clone()], &hp, Scheme::Pairwise),
        Err(Error::NonPsdKernel { view: 0, .. })
    ));
    let wrong_size = vec![KernelInput::Precomputed(Matrix::identity(3, 3))];
    assert!(kernel_consensus(&wrong_size, &[spec], &hp, Scheme::Pairwise).is_err());
}

#[test]
fn degenerate_constraint_is_rank_deficient() {
    let n = 6;
    let spec = ManifoldSpec::custom(Matrix::identity(n, n), Constraint::Matrix(Matrix::zeros(n, n)), Sense::Minimize).unwrap();
    let x = uniform(4, n, 16);
    assert!(matches!(
        subspace_consensus(&[x], &[spec], &Hyperparams::new(1, 2), Scheme::Pairwise),
        Err(Error::RankDeficientGram { view: 0 })
    ));
}

#[test]
fn dimension_above_feature_rank_is_rejected() {
    let xs = views(5, vec![2], 17);
    let result = subspace_consensus(&xs, &le_specs(&xs), &Hyperparams::new(1, 3), Scheme::Pairwise);
    assert!(matches!(result, Err(Error::DimensionTooLarge { requested: 3, available: 2 })));
}
