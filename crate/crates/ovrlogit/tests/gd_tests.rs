mod common;

use common::{binary_from, standardized_wine};
use ovrlogit::dataset::ovr_encode;
use ovrlogit::solvers::{train_gd, GdConfig, SolverError, SolverTag};

#[test]
fn zero_iterations_returns_the_zero_model_with_an_empty_trace() {
    let bds = binary_from(&[&[1.0], &[-1.0]], &[1.0, 0.0]);
    let cfg = GdConfig {
        iterations: 0,
        ..GdConfig::default()
    };
    let m = train_gd(&bds, &cfg).unwrap();
    assert!(m.weights.iter().all(|&w| w == 0.0));
    assert_eq!(m.bias, 0.0);
    assert_eq!(m.loss_trace.as_deref(), Some(&[][..]));
    assert_eq!(m.solver_tag, SolverTag::Gd);
    assert_eq!(m.hyperparams.iterations, Some(0));
    assert_eq!(m.hyperparams.learning_rate, Some(0.0001));
}

#[test]
fn trace_starts_at_ln_two_and_never_increases() {
    let (_, _, train_std) = standardized_wine();
    let bds = ovr_encode(&train_std, 0).unwrap();
    let m = train_gd(&bds, &GdConfig::default()).unwrap();
    let trace = m.loss_trace.as_ref().unwrap();

    // Zero-initialized weights score everything 0.5.
    assert_eq!(trace[0].0, 0);
    assert!((trace[0].1 - std::f64::consts::LN_2).abs() < 1e-12);

    // Iterations recorded: 0, every 100th, and the final one.
    let iters: Vec<usize> = trace.iter().map(|&(i, _)| i).collect();
    let expected: Vec<usize> = (0..=10_000).filter(|i| i % 100 == 0).collect();
    assert_eq!(iters, expected);

    for pair in trace.windows(2) {
        assert!(
            pair[1].1 <= pair[0].1 + 1e-9,
            "loss rose from {:?} to {:?}",
            pair[0],
            pair[1]
        );
    }
}

#[test]
fn wine_final_losses_land_near_expected_values() {
    let (_, _, train_std) = standardized_wine();
    let expected = [0.3664, 0.4129, 0.3498];
    for (k, &target) in expected.iter().enumerate() {
        let bds = ovr_encode(&train_std, k).unwrap();
        let m = train_gd(&bds, &GdConfig::default()).unwrap();
        let (last_iter, final_loss) = *m.loss_trace.as_ref().unwrap().last().unwrap();
        assert_eq!(last_iter, 10_000);
        assert!(
            (final_loss - target).abs() <= 0.15,
            "class {k}: final loss {final_loss:.4} vs {target}"
        );
    }
}

#[test]
fn custom_trace_interval_is_respected() {
    let bds = binary_from(&[&[1.0], &[-1.0], &[0.5], &[-0.8]], &[1.0, 0.0, 1.0, 0.0]);
    let cfg = GdConfig {
        iterations: 10,
        trace_every: 3,
        ..GdConfig::default()
    };
    let m = train_gd(&bds, &cfg).unwrap();
    let iters: Vec<usize> = m.loss_trace.unwrap().iter().map(|&(i, _)| i).collect();
    assert_eq!(iters, vec![0, 3, 6, 9, 10]);
}

#[test]
fn separable_toy_reaches_full_training_accuracy() {
    let bds = binary_from(
        &[&[1.0, 1.0], &[1.5, 0.5], &[-1.0, -1.0], &[-0.5, -1.5]],
        &[1.0, 1.0, 0.0, 0.0],
    );
    let cfg = GdConfig {
        learning_rate: 0.5,
        iterations: 20_000,
        ..GdConfig::default()
    };
    let m = train_gd(&bds, &cfg).unwrap();
    let probs = m.probabilities(&bds.features);
    for (p, t) in probs.iter().zip(bds.targets.iter()) {
        assert_eq!((*p >= 0.5) as usize as f64, *t, "p = {p}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let bds = binary_from(&[&[1.0], &[-1.0]], &[1.0, 0.0]);
    let cases = [
        GdConfig { learning_rate: 0.0, ..GdConfig::default() },
        GdConfig { learning_rate: -1.0, ..GdConfig::default() },
        GdConfig { trace_every: 0, ..GdConfig::default() },
        GdConfig { z_clip: 0.0, ..GdConfig::default() },
        GdConfig { prob_epsilon: 0.0, ..GdConfig::default() },
    ];
    for cfg in cases {
        assert!(
            matches!(train_gd(&bds, &cfg), Err(SolverError::InvalidConfig(_))),
            "config {cfg:?} should be rejected"
        );
    }
}

#[test]
fn extreme_feature_scales_stay_finite_via_score_clipping() {
    let bds = binary_from(&[&[1e8], &[-1e8]], &[1.0, 0.0]);
    let cfg = GdConfig {
        iterations: 50,
        trace_every: 10,
        ..GdConfig::default()
    };
    let m = train_gd(&bds, &cfg).unwrap();
    assert!(m.weights.iter().all(|w| w.is_finite()));
    assert!(m.bias.is_finite());
    for &(_, loss) in m.loss_trace.as_ref().unwrap() {
        assert!(loss.is_finite());
    }
}

#[test]
fn training_is_deterministic() {
    let (_, _, train_std) = standardized_wine();
    let bds = ovr_encode(&train_std, 1).unwrap();
    let cfg = GdConfig {
        iterations: 500,
        ..GdConfig::default()
    };
    let a = train_gd(&bds, &cfg).unwrap();
    let b = train_gd(&bds, &cfg).unwrap();
    assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    for (x, y) in a.weights.iter().zip(b.weights.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
