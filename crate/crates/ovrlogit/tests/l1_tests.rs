mod common;

use common::{binary_from, standardized_wine};
use ndarray::Array1;
use ovrlogit::dataset::{ovr_encode, BinaryDataset};
use ovrlogit::solvers::{
    retained_features, sigmoid, train_l1, train_reference, L1Config, SolverError,
    DEFAULT_RETENTION_THRESHOLD,
};

/// Gradient of the smooth (unpenalized) part of the objective at (w, b).
fn smooth_gradient(bds: &BinaryDataset, weights: &Array1<f64>, bias: f64) -> (Vec<f64>, f64) {
    let n = bds.n() as f64;
    let probs = (bds.features.dot(weights) + bias).mapv(sigmoid);
    let residual = &probs - &bds.targets;
    let mut grad = Vec::with_capacity(bds.d());
    for j in 0..bds.d() {
        let mut acc = 0.0;
        for i in 0..bds.n() {
            acc += bds.features[(i, j)] * residual[i];
        }
        grad.push(acc / n);
    }
    (grad, residual.sum() / n)
}

#[test]
fn converged_solutions_satisfy_subgradient_stationarity() {
    // At a minimum of loss + lambda*||w||_1: retained coordinates balance the
    // penalty exactly, zeroed ones sit inside the subgradient interval, and
    // the unpenalized bias has zero gradient.
    let (_, _, train_std) = standardized_wine();
    let cfg = L1Config::default();
    for k in 0..3 {
        let bds = ovr_encode(&train_std, k).unwrap();
        let lambda = 1.0 / (cfg.c * bds.n() as f64);
        let m = train_l1(&bds, &cfg).unwrap();
        let (grad, grad_b) = smooth_gradient(&bds, &m.weights, m.bias);

        for j in 0..bds.d() {
            let w = m.weights[j];
            if w != 0.0 {
                let residual = grad[j] + lambda * w.signum();
                assert!(
                    residual.abs() < 1e-6,
                    "class {k} feature {j}: stationarity residual {residual:.3e}"
                );
            } else {
                assert!(
                    grad[j].abs() <= lambda + 1e-6,
                    "class {k} feature {j}: |grad| {:.3e} outside [-lambda, lambda]",
                    grad[j]
                );
            }
        }
        assert!(grad_b.abs() < 1e-6, "class {k}: bias gradient {grad_b:.3e}");
    }
}

#[test]
fn wine_retention_counts_and_top_features() {
    let (_, _, train_std) = standardized_wine();
    let names = &train_std.feature_names;

    let b0 = ovr_encode(&train_std, 0).unwrap();
    let m0 = train_l1(&b0, &L1Config::default()).unwrap();
    let kept0 = retained_features(&m0, DEFAULT_RETENTION_THRESHOLD);
    assert!(
        (3..=6).contains(&kept0.len()),
        "class 0 retained {} features",
        kept0.len()
    );
    let top0 = kept0
        .iter()
        .copied()
        .max_by(|&a, &b| m0.weights[a].abs().partial_cmp(&m0.weights[b].abs()).unwrap())
        .unwrap();
    assert_eq!(names[top0], "proline");

    let b1 = ovr_encode(&train_std, 1).unwrap();
    let m1 = train_l1(&b1, &L1Config::default()).unwrap();
    let kept1 = retained_features(&m1, DEFAULT_RETENTION_THRESHOLD);
    assert!(
        (4..=8).contains(&kept1.len()),
        "class 1 retained {} features",
        kept1.len()
    );
}

#[test]
fn stronger_regularization_zeroes_everything() {
    // C = 0.001 on the standardized class-0 task pushes lambda far above
    // every gradient: the zero vector is already stationary.
    let (_, _, train_std) = standardized_wine();
    let bds = ovr_encode(&train_std, 0).unwrap();
    let cfg = L1Config {
        c: 0.001,
        ..L1Config::default()
    };
    let m = train_l1(&bds, &cfg).unwrap();
    assert!(retained_features(&m, DEFAULT_RETENTION_THRESHOLD).is_empty());
}

#[test]
fn vanishing_penalty_matches_the_reference_labels() {
    // Overlapping clusters: the unregularized optimum is finite, so C = 1e6
    // converges at the default tolerance and lands on the reference solution.
    let rows: [&[f64]; 10] = [
        &[1.2, 0.4],
        &[0.8, -0.3],
        &[1.5, 0.9],
        &[0.3, 0.2],
        &[0.9, 0.6],
        &[-1.1, -0.4],
        &[-0.7, 0.3],
        &[-1.4, -0.8],
        &[-0.2, -0.6],
        &[0.1, -0.9],
    ];
    let targets = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    let bds = binary_from(&rows, &targets);

    let l1 = train_l1(
        &bds,
        &L1Config {
            c: 1e6,
            ..L1Config::default()
        },
    )
    .unwrap();
    let reference = train_reference(&bds, 1e-6, 100).unwrap();

    let pl = l1.probabilities(&bds.features);
    let pr = reference.probabilities(&bds.features);
    for i in 0..bds.n() {
        assert_eq!(pl[i] >= 0.5, pr[i] >= 0.5, "row {i}: {} vs {}", pl[i], pr[i]);
    }
}

#[test]
fn zero_variance_column_keeps_a_zero_weight() {
    let bds = binary_from(
        &[&[0.0, 1.0], &[0.0, -1.0], &[0.0, 0.5], &[0.0, -0.5]],
        &[1.0, 0.0, 1.0, 0.0],
    );
    // Four rows make the penalty 1/(C*n) steep, so C must be generous for
    // the informative column to survive at all.
    let m = train_l1(
        &bds,
        &L1Config {
            c: 10.0,
            ..L1Config::default()
        },
    )
    .unwrap();
    assert_eq!(m.weights[0], 0.0);
    assert!(m.weights[1] > 0.0);
}

#[test]
fn bias_is_not_penalized() {
    // No usable features: the bias alone must reach the base rate, which a
    // penalized intercept could not do.
    let bds = binary_from(&[&[0.0], &[0.0], &[0.0], &[0.0]], &[1.0, 1.0, 1.0, 0.0]);
    let m = train_l1(&bds, &L1Config::default()).unwrap();
    assert_eq!(m.weights[0], 0.0);
    assert!((sigmoid(m.bias) - 0.75).abs() < 1e-7, "bias {}", m.bias);
}

#[test]
fn invalid_configs_are_rejected() {
    let bds = binary_from(&[&[1.0], &[-1.0]], &[1.0, 0.0]);
    let bad = [
        L1Config { c: 0.0, ..L1Config::default() },
        L1Config { c: -1.0, ..L1Config::default() },
        L1Config { c: f64::INFINITY, ..L1Config::default() },
        L1Config { tolerance: 0.0, ..L1Config::default() },
        L1Config { tolerance: -1e-8, ..L1Config::default() },
    ];
    for cfg in bad {
        assert!(
            matches!(train_l1(&bds, &cfg), Err(SolverError::InvalidConfig(_))),
            "config {cfg:?} should be rejected"
        );
    }
}

#[test]
fn hitting_the_sweep_cap_reports_the_last_change() {
    let (_, _, train_std) = standardized_wine();
    let bds = ovr_encode(&train_std, 0).unwrap();
    let cfg = L1Config {
        max_iterations: 1,
        ..L1Config::default()
    };
    match train_l1(&bds, &cfg) {
        Err(SolverError::L1NonConvergence {
            max_iterations,
            last_change,
        }) => {
            assert_eq!(max_iterations, 1);
            assert!(last_change > 0.0 && last_change.is_finite());
        }
        other => panic!("expected L1NonConvergence, got {other:?}"),
    }
}

#[test]
fn hyperparameters_record_the_run() {
    let (_, _, train_std) = standardized_wine();
    let bds = ovr_encode(&train_std, 2).unwrap();
    let m = train_l1(&bds, &L1Config::default()).unwrap();
    assert_eq!(m.hyperparams.c, Some(0.1));
    assert_eq!(m.hyperparams.tolerance, Some(1e-8));
    let sweeps = m.hyperparams.iterations.unwrap();
    assert!(sweeps > 0 && sweeps <= 100_000);
    assert!(m.hyperparams.learning_rate.is_none());
    assert!(m.loss_trace.is_none());
}

#[test]
fn training_is_deterministic() {
    let (_, _, train_std) = standardized_wine();
    let bds = ovr_encode(&train_std, 1).unwrap();
    let a = train_l1(&bds, &L1Config::default()).unwrap();
    let b = train_l1(&bds, &L1Config::default()).unwrap();
    assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    for (x, y) in a.weights.iter().zip(b.weights.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
