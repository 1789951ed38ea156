mod common;

use heckfa::assignment::{
    mae_loss, relaxed_mae_loss, train_assignment, AssignmentProbabilities, GumbelDraw,
};
use heckfa::pipeline::{standardize, synthesize, SyntheticSpec};
use heckfa::{fit_heckman, FeatureMask, RhoRange, RunConfig};
use nalgebra::Matrix2xX;
use proptest::prelude::*;

#[test]
fn mae_matches_naive_summation() {
    let mut r = common::rng(8);
    for _ in 0..20 {
        let data = common::random_dataset(&mut r, 120, 4, 20);
        let fit = fit_heckman(&data, &FeatureMask::new(vec![true, false, true, true]).unwrap()).unwrap();
        let mut total = 0.0;
        for i in 0..data.m() {
            let mut yhat = fit.beta_hat[0] + fit.beta_h_hat * fit.lambda_hat[i];
            for k in 0..4 {
                yhat += fit.beta_hat[k + 1] * data.x_sel()[(i, k)];
            }
            total += (data.y_observed()[i] - yhat).abs();
        }
        let expected = total / data.m() as f64;
        assert!((mae_loss(&fit, &data) - expected).abs() < 1e-12);
    }
}

#[test]
fn cold_relaxation_agrees_with_the_hard_forward_pass() {
    let mut r = common::rng(31);
    for _ in 0..30 {
        let data = common::random_dataset(&mut r, 150, 5, 30);
        let pi = common::random_pi(&mut r, 5);
        let (warm, mask) = common::nonempty_draw(&mut r, &pi, 1.0);
        let cold = GumbelDraw::from_noise(pi.matrix(), warm.g.clone(), 1e-3);
        let fit = fit_heckman(&data, &mask).unwrap();
        let hard = mae_loss(&fit, &data);
        let soft = relaxed_mae_loss(&data, &fit, &cold);
        assert!((hard - soft).abs() < 1e-4 * hard, "hard {hard} soft {soft}");
    }
}

proptest! {
    #[test]
    fn every_gradient_step_stays_feasible(
        start in prop::collection::vec(0.0f64..1.0, 1..10),
        grad in prop::collection::vec(-1e3f64..1e3, 20),
        lr in 0.0f64..10.0,
    ) {
        let k = start.len();
        let raw = Matrix2xX::from_fn(k, |q, c| if q == 1 { start[c] } else { 1.0 - start[c] });
        let pi = AssignmentProbabilities::project(&raw);
        let g = Matrix2xX::from_fn(k, |q, c| grad[(2 * c + q) % grad.len()]);
        let next = pi.gradient_step(&g, lr);
        prop_assert!(AssignmentProbabilities::new(next.matrix().clone()).is_ok());
        for c in 0..k {
            prop_assert!((next.assigned(c) + next.not_assigned(c) - 1.0).abs() < 1e-12);
            prop_assert!(next.assigned(c) >= 1e-6 && next.not_assigned(c) >= 1e-6);
        }
    }
}

/// Three predictive features, one selection-only feature, two pure noise
/// features.
fn tendency_spec() -> SyntheticSpec {
    let mut spec = SyntheticSpec::standard(3000, 6, 0.5);
    spec.beta = vec![1.0, 1.0, -0.5, 0.8, 0.0, 0.0, 0.0];
    spec.gamma = vec![0.2, 0.3, -0.2, 0.25, 1.0, 0.0, 0.0];
    spec.true_mask = FeatureMask::from_indices(6, &[0, 1, 2]).unwrap();
    spec
}

#[test]
#[ignore = "not reproduced: training raises the selection-only feature to the clamp, and predictive features \
            win in only 4 of 20 seeds (see README, known deviations)"]
fn training_favours_predictive_features() {
    let spec = tendency_spec();
    let mut wins = 0;
    for seed in 0..20 {
        let (data, _) = synthesize(&spec, seed).unwrap();
        let (data, _) = standardize(&data).unwrap();
        let mut config = RunConfig::new(RhoRange::new(0.1, 0.9).unwrap(), seed);
        config.epochs = 1000;
        let (pi, _) = train_assignment(&data, &config).unwrap();
        let row = pi.assigned_row();
        let mean = |pred: bool| {
            let v: Vec<f64> = (0..6).filter(|&k| spec.true_mask.is_assigned(k) == pred).map(|k| row[k]).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        if mean(true) > mean(false) {
            wins += 1;
        }
    }
    assert!(wins >= 14, "predictive features ranked higher in {wins}/20 seeds");
}
