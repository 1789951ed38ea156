//! Losses of the assignment objective and their gradients with respect to `π`.
//!
//! All gradients follow one chain: a per-sample loss weight `w_i = ∂L/∂ŷ_i`,
//! then `∂L/∂ψ(k) = β̂_k Σ_i w_i x_ik`, then the softmax partials
//!
//! ```text
//! ∂z̃_2k/∂π_2k =  z̃_1k z̃_2k / (τ π_2k)
//! ∂z̃_2k/∂π_1k = −z̃_1k z̃_2k / (τ π_1k)
//! ```
//!
//! with `ψ(k)` depending on `z̃_2k` alone (`∂ψ/∂z̃_2k = 1`). `β̂`, `β̂_H` and
//! `λ̂` are held fixed; nothing is differentiated through the least-squares
//! solve or the probit stage.

use nalgebra::{DVector, Matrix2xX};

use super::gumbel::{AssignmentProbabilities, GumbelDraw};
use crate::dataset::Dataset;
use crate::selection::HeckmanFit;

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(1/m) Σ |y_i − (x_i^(p) β̂ + λ̂_i β̂_H)|` over the observed samples.
pub fn mae_loss(fit: &HeckmanFit, data: &Dataset) -> f64 {
    fit.residuals(data).iter().map(|r| r.abs()).sum::<f64>() / data.m() as f64
}

/// Fitted values with each feature scaled by its relaxed assignment `z̃_2k`
/// instead of the hard `ψ(k)`.
pub fn relaxed_fitted(data: &Dataset, fit: &HeckmanFit, draw: &GumbelDraw) -> DVector<f64> {
    let m = data.m();
    let scaled = DVector::from_fn(data.k(), |k, _| fit.beta_hat[k + 1] * draw.z_soft[(1, k)]);
    let mut yhat = (data.x_sel().rows(0, m) * scaled).add_scalar(fit.beta_hat[0]);
    yhat.axpy(fit.beta_h_hat, &fit.lambda_hat, 1.0);
    yhat
}

/// MAE of the relaxed forward pass.
pub fn relaxed_mae_loss(data: &Dataset, fit: &HeckmanFit, draw: &GumbelDraw) -> f64 {
    let r = data.y_observed() - relaxed_fitted(data, fit, draw);
    r.iter().map(|v| v.abs()).sum::<f64>() / data.m() as f64
}

/// Straight-through gradient of the MAE: residual signs come from the hard
/// forward pass (the fit itself), partials from the softmax relaxation.
pub fn mae_gradient(
    data: &Dataset,
    fit: &HeckmanFit,
    draw: &GumbelDraw,
    pi: &AssignmentProbabilities,
) -> Matrix2xX<f64> {
    let weights = mae_weights(&fit.residuals(data));
    through_softmax(&psi_sensitivity(data, fit, &weights), draw, pi.matrix())
}

/// The same chain with residual signs taken from the relaxed forward pass,
/// so it is the exact derivative of [`relaxed_mae_loss`] away from kinks.
/// `pi` may be any positive matrix consistent with `draw`.
pub fn relaxed_mae_gradient(
    data: &Dataset,
    fit: &HeckmanFit,
    draw: &GumbelDraw,
    pi: &Matrix2xX<f64>,
) -> Matrix2xX<f64> {
    let residuals = data.y_observed() - relaxed_fitted(data, fit, draw);
    let weights = mae_weights(&residuals);
    through_softmax(&psi_sensitivity(data, fit, &weights), draw, pi)
}

/// The chain gradient with the squared-error factor `−(2/m)(y_i − ŷ_i)` in
/// place of the absolute-error one. Residuals are recomputed from the fit's
/// coefficients, so a least-squares fit yields a zero matrix up to rounding.
pub fn mse_gradient_probe(
    data: &Dataset,
    fit: &HeckmanFit,
    draw: &GumbelDraw,
    pi: &AssignmentProbabilities,
) -> Matrix2xX<f64> {
    let m = data.m() as f64;
    let weights = fit.residuals(data) * (-2.0 / m);
    through_softmax(&psi_sensitivity(data, fit, &weights), draw, pi.matrix())
}

fn mae_weights(residuals: &DVector<f64>) -> DVector<f64> {
    let m = residuals.len() as f64;
    residuals.map(|r| -sign(r) / m)
}

/// `∂L/∂ψ(k) = β̂_k Σ_i w_i x_ik`.
fn psi_sensitivity(data: &Dataset, fit: &HeckmanFit, weights: &DVector<f64>) -> Vec<f64> {
    let m = data.m();
    let projected = data.x_sel().rows(0, m).tr_mul(weights);
    (0..data.k())
        .map(|k| {
            let beta = fit.beta_hat[k + 1];
            if beta == 0.0 {
                0.0
            } else {
                beta * projected[k]
            }
        })
        .collect()
}

fn through_softmax(dpsi: &[f64], draw: &GumbelDraw, pi: &Matrix2xX<f64>) -> Matrix2xX<f64> {
    let mut grad = Matrix2xX::zeros(dpsi.len());
    for (k, &d) in dpsi.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let shared = draw.soft_product(k) / draw.tau;
        grad[(1, k)] = d * shared / pi[(1, k)];
        grad[(0, k)] = -d * shared / pi[(0, k)];
    }
    grad
}
