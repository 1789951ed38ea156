mod common;

use approx::assert_abs_diff_eq;
use heckfa::pipeline::{synthesize, SyntheticSpec};
use heckfa::selection::{
    estimate_sigma_rho, fit_outcome, inverse_mills, probit_score, selection_stage, std_normal_cdf,
};
use heckfa::{fit_heckman, fit_probit, Dataset, FeatureMask};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn step2_design(data: &Dataset, mask: &FeatureMask, lambda: &DVector<f64>) -> DMatrix<f64> {
    let m = data.m();
    let cols = mask.indices();
    DMatrix::from_fn(m, cols.len() + 2, |i, c| {
        if c == 0 {
            1.0
        } else if c <= cols.len() {
            data.x_sel()[(i, cols[c - 1])]
        } else {
            lambda[i]
        }
    })
}

#[test]
fn noiseless_outcome_is_recovered_exactly() {
    let mut r = common::rng(3);
    let n = 300;
    let x = DMatrix::from_fn(n, 3, |_, _| r.sample::<f64, _>(StandardNormal));
    // selection depends on x only, so it is independent of the (absent) noise
    let outcomes: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let u: f64 = r.sample(StandardNormal);
            (0.3 + 0.8 * x[(i, 2)] + u > 0.0).then(|| 2.0 * x[(i, 0)])
        })
        .collect();
    let data = Dataset::from_rows(x, &outcomes, common::names(3), Vec::new()).unwrap();
    let mask = FeatureMask::all(3);
    let fit = fit_heckman(&data, &mask).unwrap();
    assert_abs_diff_eq!(fit.beta_hat[1], 2.0, epsilon = 1e-6);

    let design = step2_design(&data, &mask, &fit.lambda_hat);
    let direct = design.svd(true, true).solve(data.y_observed(), 1e-14).unwrap();
    assert_abs_diff_eq!(fit.beta_h_hat, direct[4], epsilon = 1e-9);
    assert_abs_diff_eq!(fit.beta_h_hat, 0.0, epsilon = 1e-6);
}

#[test]
fn full_mask_with_near_linear_imr_is_worst_conditioned() {
    let mut r = common::rng(11);
    let n = 2000;
    let x = DMatrix::from_fn(n, 3, |_, _| r.sample::<f64, _>(StandardNormal));
    // a weak selection index keeps λ close to linear in the features
    let outcomes: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let u: f64 = r.sample(StandardNormal);
            let e: f64 = r.sample(StandardNormal);
            let index = 0.1 + 0.15 * (x[(i, 0)] + x[(i, 1)] + x[(i, 2)]);
            (index + u > 0.0).then(|| 1.0 + x[(i, 0)] - x[(i, 1)] + e)
        })
        .collect();
    let data = Dataset::from_rows(x, &outcomes, common::names(3), Vec::new()).unwrap();
    let stage = selection_stage(&data).unwrap();
    let full = fit_outcome(&data, &stage, &FeatureMask::all(3)).unwrap();
    for bits in 1..7u32 {
        let mask = FeatureMask::new((0..3).map(|k| bits & (1 << k) != 0).collect()).unwrap();
        let sub = fit_outcome(&data, &stage, &mask).unwrap();
        assert!(
            full.imr_condition_number > sub.imr_condition_number,
            "{} vs {} for {}",
            full.imr_condition_number,
            sub.imr_condition_number,
            mask.bit_string()
        );
    }
}

#[test]
fn sigma_rho_matches_direct_recomputation() {
    let mut r = common::rng(5);
    for _ in 0..20 {
        let data = common::random_dataset(&mut r, 150, 4, 30);
        let mask = FeatureMask::new(vec![true, r.random(), true, r.random()]).unwrap();
        let fit = fit_heckman(&data, &mask).unwrap();
        let m = data.m();
        let g = &fit.probit.gamma_hat;
        let mut ssr = 0.0;
        let mut corr = 0.0;
        for i in 0..m {
            let index = g[0] + (0..4).map(|k| g[k + 1] * data.x_sel()[(i, k)]).sum::<f64>();
            let lam = std_normal_pdf_direct(index) / std_normal_cdf(index);
            let yhat = fit.beta_hat[0]
                + (0..4).map(|k| fit.beta_hat[k + 1] * data.x_sel()[(i, k)]).sum::<f64>()
                + fit.beta_h_hat * lam;
            ssr += (data.y_observed()[i] - yhat).powi(2);
            corr += lam * (-index) - lam * lam;
        }
        let sigma_sq = ssr / m as f64 - fit.beta_h_hat.powi(2) * corr / m as f64;
        let sr = estimate_sigma_rho(&fit, &data, &fit.probit);
        assert_abs_diff_eq!(sr.sigma_sq, sigma_sq, epsilon = 1e-9 * (1.0 + sigma_sq.abs()));
        assert_eq!(sr.sigma_sq, fit.sigma_sq_hat);
        if sigma_sq > 0.0 {
            assert_abs_diff_eq!(sr.rho.unwrap(), fit.beta_h_hat / sigma_sq.sqrt(), epsilon = 1e-8);
        } else {
            assert!(sr.rho.is_none());
        }
    }
}

fn std_normal_pdf_direct(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn probit_score_vanishes_at_the_estimate() {
    let mut r = common::rng(21);
    for _ in 0..20 {
        let data = common::random_dataset(&mut r, 200, 5, 20);
        let fit = fit_probit(&data).unwrap();
        assert!(fit.converged);
        let score = probit_score(&data.selection_design(), &data.selection_indicator(), &fit.gamma_hat);
        assert!(score.amax() < 1e-8, "score {}", score.amax());
    }
}

#[test]
fn conditional_variance_identity_holds_at_true_parameters() {
    let spec = SyntheticSpec::standard(10_000, 6, 0.5);
    let (mut empirical, mut predicted) = (0.0, 0.0);
    for seed in 0..50 {
        let (data, truth) = synthesize(&spec, seed).unwrap();
        let m = data.m();
        let (mut v2, mut corr) = (0.0, 0.0);
        for i in 0..m {
            let orig = data.row_order()[i];
            let index = spec.gamma[0] + (0..6).map(|k| spec.gamma[k + 1] * data.x_sel()[(i, k)]).sum::<f64>();
            let lam = inverse_mills(index);
            let v = truth.u_p[orig] - spec.rho * spec.sigma * lam;
            v2 += v * v;
            corr += lam * (-index) - lam * lam;
        }
        empirical += v2 / m as f64;
        predicted += spec.sigma.powi(2) * (1.0 + spec.rho.powi(2) * corr / m as f64);
    }
    let rel = (empirical - predicted).abs() / predicted;
    assert!(rel < 0.05, "empirical {empirical} predicted {predicted}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step2_residuals_are_orthogonal_to_the_design(seed in 0u64..10_000, k in 2usize..7, bits in 1u32..64) {
        let mut r = common::rng(seed);
        let data = common::random_dataset(&mut r, 120, k, 25);
        let assigned: Vec<bool> = (0..k).map(|c| bits & (1 << c) != 0).collect();
        prop_assume!(assigned.iter().any(|&a| a));
        let mask = FeatureMask::new(assigned).unwrap();
        let fit = fit_heckman(&data, &mask).unwrap();
        let v = fit.residuals(&data);
        let design = step2_design(&data, &mask, &fit.lambda_hat);
        for col in design.column_iter() {
            let bound = 1e-8 * (v.norm() * col.norm()).max(f64::MIN_POSITIVE);
            prop_assert!(v.dot(&col).abs() <= bound);
        }
    }

    #[test]
    fn compressed_solve_matches_zero_padded_pseudo_inverse(seed in 0u64..10_000, k in 2usize..7, bits in 1u32..64) {
        let mut r = common::rng(seed);
        let data = common::random_dataset(&mut r, 100, k, 25);
        let assigned: Vec<bool> = (0..k).map(|c| bits & (1 << c) != 0).collect();
        prop_assume!(assigned.iter().any(|&a| a));
        let mask = FeatureMask::new(assigned).unwrap();
        let fit = fit_heckman(&data, &mask).unwrap();
        let m = data.m();
        let padded = DMatrix::from_fn(m, k + 2, |i, c| match c {
            0 => 1.0,
            c if c <= k => if mask.is_assigned(c - 1) { data.x_sel()[(i, c - 1)] } else { 0.0 },
            _ => fit.lambda_hat[i],
        });
        let coef = padded.clone().svd(true, true).solve(data.y_observed(), 1e-10).unwrap();
        let yhat = padded * coef;
        let diff = (yhat - fit.fitted(&data)).amax();
        prop_assert!(diff < 1e-8 * (1.0 + data.y_observed().amax()), "diff {}", diff);
    }
}
