mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::default_experiment;
use nondet_optics::interferometer::MeshParams;
use nondet_optics::learning::*;
use nondet_optics::Error;

fn random_params<R: Rng>(rng: &mut R, modes: usize) -> MeshParams {
    let flat: Vec<f64> = (0..modes * modes)
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    MeshParams::from_flat(modes, &flat).unwrap()
}

fn finite_difference(
    obj: &Objective,
    params: &MeshParams,
    hyper: &Hyperparams,
    k: usize,
    h: f64,
) -> f64 {
    let flat = params.to_flat();
    let at = |delta: f64| {
        let mut shifted = flat.clone();
        shifted[k] += delta;
        obj.evaluate(
            &MeshParams::from_flat(params.modes, &shifted).unwrap(),
            hyper,
        )
        .unwrap()
        .loss
    };
    (at(h) - at(-h)) / (2.0 * h)
}

#[test]
fn gradient_matches_central_differences() {
    let exp = default_experiment();
    let obj = exp.objective().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for point in 0..10 {
        let params = random_params(&mut rng, 6);
        let s = obj
            .evaluate(&params, &Hyperparams::default())
            .unwrap()
            .success;
        // Put S* on both sides of S so both penalty regimes are exercised.
        let hyper = Hyperparams {
            s_star: (s + if point % 2 == 0 { 1e-4 } else { -1e-4 }).clamp(0.0, 1.0),
            ..Hyperparams::default()
        };
        let (_, grad) = obj.evaluate_with_gradient(&params, &hyper).unwrap();
        for (k, g) in grad.iter().enumerate() {
            let fd = finite_difference(&obj, &params, &hyper, k, 1e-6);
            let tol = (1e-5 * fd.abs()).max(1e-8);
            assert!((g - fd).abs() <= tol, "point {point} k {k}: {g} vs {fd}");
        }
    }
}

#[test]
fn ancilla_output_phases_do_not_affect_the_loss() {
    let exp = default_experiment();
    let obj = exp.objective().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let params = random_params(&mut rng, 6);
        let (_, grad) = obj
            .evaluate_with_gradient(&params, &Hyperparams::default())
            .unwrap();
        assert!(grad[34].abs() <= 1e-12 && grad[35].abs() <= 1e-12);
    }
}

#[test]
fn reference_loss_agrees_with_objective() {
    let exp = default_experiment();
    let obj = exp.objective().unwrap();
    let hyper = Hyperparams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let params = random_params(&mut rng, 6);
        let a = loss(&params, &exp.setup, &exp.detector, &exp.target, &hyper).unwrap();
        let b = obj.evaluate(&params, &hyper).unwrap();
        assert!((a.loss - b.loss).abs() < 1e-12);
        assert!((a.fidelity - b.fidelity).abs() < 1e-12);
        assert!((a.success - b.success).abs() < 1e-12);
        let g = grad_loss(&params, &exp.setup, &exp.detector, &exp.target, &hyper).unwrap();
        assert_eq!(g, obj.evaluate_with_gradient(&params, &hyper).unwrap().1);
    }
}

#[test]
fn penalty_vanishes_well_above_threshold() {
    let exp = default_experiment();
    let obj = exp.objective().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    while checked < 5 {
        let params = random_params(&mut rng, 6);
        let s = obj
            .evaluate(&params, &Hyperparams::default())
            .unwrap()
            .success;
        if s < 0.06 {
            continue;
        }
        let with = Hyperparams {
            s_star: s - 0.05,
            ..Hyperparams::default()
        };
        let without = Hyperparams { alpha: 0.0, ..with };
        let (ra, ga) = obj.evaluate_with_gradient(&params, &with).unwrap();
        let (rb, gb) = obj.evaluate_with_gradient(&params, &without).unwrap();
        assert!((ra.loss - rb.loss).abs() < 1e-12);
        for (a, b) in ga.iter().zip(&gb) {
            assert!((a - b).abs() < 1e-12);
        }
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loss_decomposes_into_logged_parts(seed in any::<u64>(), s_star in 0.0..0.2f64, alpha in 0.0..20.0f64) {
        let exp = default_experiment();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_params(&mut rng, 6);
        let hyper = Hyperparams { s_star, alpha, ..Hyperparams::default() };
        let r = exp.evaluate(&params, &hyper).unwrap();
        let residual = r.loss - alpha * softplus(s_star - r.success, hyper.beta) + r.fidelity.sqrt();
        prop_assert!((residual - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
    }

    #[test]
    fn loss_is_monotone_in_threshold(seed in any::<u64>(), a in 0.0..0.2f64, b in 0.0..0.2f64) {
        let exp = default_experiment();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_params(&mut rng, 6);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let eval = |s_star| exp.evaluate(&params, &Hyperparams { s_star, ..Hyperparams::default() }).unwrap();
        let (rl, rh) = (eval(lo), eval(hi));
        prop_assert!(rh.loss >= rl.loss);
        let beta = Hyperparams::default().beta;
        if lo > rl.success + 1.0 / beta && hi > lo {
            prop_assert!(rh.loss > rl.loss);
        }
    }
}

#[test]
fn trajectory_records_are_self_consistent_and_deterministic() {
    let exp = default_experiment();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let initial = random_params(&mut rng, 6);
    let hyper = Hyperparams {
        iterations: 50,
        learning_rate: 0.01,
        ..Hyperparams::default()
    };
    let (end_a, traj_a) = train(
        &exp.setup,
        &exp.detector,
        &exp.target,
        &hyper,
        initial.clone(),
    )
    .unwrap();
    let (end_b, traj_b) = train(
        &exp.setup,
        &exp.detector,
        &exp.target,
        &hyper,
        initial.clone(),
    )
    .unwrap();
    assert_eq!(end_a, end_b);
    assert_eq!(traj_a, traj_b);
    assert_eq!(traj_a.len(), 50);
    for (i, r) in traj_a.iter().enumerate() {
        assert_eq!(r.iteration, i);
        assert!((hyper.loss_from(r.fidelity, r.success) - r.loss).abs() <= 1e-10);
    }
    let start = exp.evaluate(&initial, &hyper).unwrap();
    assert_eq!(traj_a[0].loss, start.loss);
    assert!(traj_a.last().unwrap().loss < traj_a[0].loss);
}

#[test]
fn zero_iterations_returns_the_start() {
    let exp = default_experiment();
    let initial = MeshParams::zeros(6);
    let hyper = Hyperparams {
        iterations: 0,
        ..Hyperparams::default()
    };
    let (end, traj) = train(
        &exp.setup,
        &exp.detector,
        &exp.target,
        &hyper,
        initial.clone(),
    )
    .unwrap();
    assert_eq!(end, initial);
    assert!(traj.is_empty());
}

#[test]
fn bootstrap_without_restarts_reports_its_best_candidate() {
    let exp = default_experiment();
    let opts = BootstrapOptions {
        restarts: 0,
        search_iterations: 2,
        polish_iterations: 0,
        ..BootstrapOptions::default()
    };
    match bootstrap_ideal(&exp.setup, &exp.target, &opts, Some(MeshParams::zeros(6))) {
        Err(Error::BootstrapFailed {
            attempts,
            fidelity,
            best,
            ..
        }) => {
            assert_eq!(attempts, 1);
            assert!(fidelity < 1.0 - 1e-6);
            assert_eq!(best.modes, 6);
        }
        other => panic!("expected failure, got {other:?}"),
    }
}

#[test]
fn bootstrap_is_reproducible_per_seed() {
    let exp = default_experiment();
    let opts = BootstrapOptions {
        seed: 7,
        restarts: 8,
        ..BootstrapOptions::default()
    };
    let a = bootstrap_ideal(&exp.setup, &exp.target, &opts, None).unwrap();
    let b = bootstrap_ideal(&exp.setup, &exp.target, &opts, None).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.attempt, b.attempt);
    assert!(a.fidelity >= opts.min_fidelity && a.success >= opts.min_success);
    let (f, s) = exp.ideal_report(&a.params).unwrap();
    assert!((f - a.fidelity).abs() < 1e-12 && (s - a.success).abs() < 1e-12);
}
