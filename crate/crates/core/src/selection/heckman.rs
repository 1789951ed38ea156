//! Two-step estimator: probit selection stage, inverse Mills ratios, and the
//! IMR-augmented least-squares outcome stage with its diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::normal::inverse_mills;
use super::probit::{fit_probit, ProbitFit};
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::linalg::least_squares;

/// Step-1 output shared by every outcome fit on the same data: the probit
/// stage does not depend on which features are assigned for prediction.
#[derive(Clone, Debug)]
pub struct SelectionStage {
    pub probit: ProbitFit,
    /// Selection index `x_i γ̂` for the `m` observed samples.
    pub index: DVector<f64>,
    /// `λ̂_i` for the `m` observed samples.
    pub lambda: DVector<f64>,
}

impl SelectionStage {
    pub fn new(data: &Dataset, probit: ProbitFit) -> Self {
        let index = observed_index(data, &probit.gamma_hat);
        let lambda = index.map(inverse_mills);
        SelectionStage { probit, index, lambda }
    }
}

pub fn selection_stage(data: &Dataset) -> Result<SelectionStage> {
    Ok(SelectionStage::new(data, fit_probit(data)?))
}

fn observed_index(data: &Dataset, gamma: &DVector<f64>) -> DVector<f64> {
    let m = data.m();
    let x = data.x_sel().rows(0, m);
    let slopes = gamma.rows(1, data.k());
    (x * slopes).add_scalar(gamma[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeckmanFit {
    /// Intercept followed by one coefficient per selection feature; zero at
    /// unassigned positions.
    pub beta_hat: DVector<f64>,
    /// Coefficient on the IMR column, an estimate of `ρσ`.
    pub beta_h_hat: f64,
    pub lambda_hat: DVector<f64>,
    pub sigma_sq_hat: f64,
    /// `None` when `σ̂² <= 0`.
    pub rho_hat: Option<f64>,
    pub r2: f64,
    pub r2_adj: f64,
    pub mask: FeatureMask,
    /// Condition number of the Step-2 design `[1 | assigned | λ̂]`.
    pub imr_condition_number: f64,
    pub probit: ProbitFit,
}

impl HeckmanFit {
    /// In-sample fitted values on the observed rows, including the IMR term.
    pub fn fitted(&self, data: &Dataset) -> DVector<f64> {
        let mut yhat = self.linear_part(data, data.m());
        yhat.axpy(self.beta_h_hat, &self.lambda_hat, 1.0);
        yhat
    }

    pub fn residuals(&self, data: &Dataset) -> DVector<f64> {
        data.y_observed() - self.fitted(data)
    }

    /// `β̂_0 + x_i β̂` for the first `rows` rows, without the IMR term.
    pub fn linear_part(&self, data: &Dataset, rows: usize) -> DVector<f64> {
        linear_predictor(&self.beta_hat, &data.x_sel().rows(0, rows).into_owned())
    }
}

/// `b_0 + X b_{1..}` for a coefficient vector with leading intercept.
pub(crate) fn linear_predictor(beta: &DVector<f64>, x: &DMatrix<f64>) -> DVector<f64> {
    (x * beta.rows(1, x.ncols())).add_scalar(beta[0])
}

/// Runs both steps on `data` with the prediction features given by `mask`.
pub fn fit_heckman(data: &Dataset, mask: &FeatureMask) -> Result<HeckmanFit> {
    let stage = selection_stage(data)?;
    fit_outcome(data, &stage, mask)
}

/// Step 2 against a precomputed selection stage.
pub fn fit_outcome(data: &Dataset, stage: &SelectionStage, mask: &FeatureMask) -> Result<HeckmanFit> {
    if mask.k() != data.k() {
        return Err(Error::InvalidMask(format!(
            "mask covers {} features, data has {}",
            mask.k(),
            data.k()
        )));
    }
    let m = data.m();
    let assigned = mask.indices();
    let j = assigned.len();
    if j == 0 {
        return Err(Error::AllZeroMask);
    }
    if m < j + 2 {
        return Err(Error::InsufficientSamples { m, j });
    }

    let mut design = DMatrix::zeros(m, j + 2);
    design.column_mut(0).fill(1.0);
    for (c, &k) in assigned.iter().enumerate() {
        design.column_mut(c + 1).copy_from(&data.observed_column(k));
    }
    design.column_mut(j + 1).copy_from(&stage.lambda);

    let y = data.y_observed();
    let ls = least_squares(&design, y)?;

    let mut beta_hat = DVector::zeros(data.k() + 1);
    beta_hat[0] = ls.coefficients[0];
    for (c, &k) in assigned.iter().enumerate() {
        beta_hat[k + 1] = ls.coefficients[c + 1];
    }
    let beta_h_hat = ls.coefficients[j + 1];

    let residuals = y - &design * &ls.coefficients;
    let ssr = residuals.norm_squared();
    let r2 = coefficient_of_determination(y, ssr);
    let r2_adj = adjusted_r2(r2, m, j)?;

    let mut fit = HeckmanFit {
        beta_hat,
        beta_h_hat,
        lambda_hat: stage.lambda.clone(),
        sigma_sq_hat: f64::NAN,
        rho_hat: None,
        r2,
        r2_adj,
        mask: mask.clone(),
        imr_condition_number: ls.condition_number,
        probit: stage.probit.clone(),
    };
    let sr = estimate_sigma_rho(&fit, data, &stage.probit);
    fit.sigma_sq_hat = sr.sigma_sq;
    fit.rho_hat = sr.rho;
    Ok(fit)
}

/// `1 - SSR/SST` around the mean of `y`. A constant response counts as
/// perfectly explained when the residuals vanish and unexplained otherwise.
pub(crate) fn coefficient_of_determination(y: &DVector<f64>, ssr: f64) -> f64 {
    let mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if sst > 0.0 {
        1.0 - ssr / sst
    } else if ssr <= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaRho {
    pub sigma_sq: f64,
    pub rho: Option<f64>,
}

/// Moment estimator of the outcome noise variance and the noise correlation:
///
/// `σ̂² = (1/m) Σ v_i² − (β̂_H²/m) Σ [λ̂_i (−x_i γ̂) − λ̂_i²]`, `ρ̂ = β̂_H / σ̂`,
///
/// where `v_i` are the Step-2 residuals. Reads `beta_hat`, `beta_h_hat` and
/// `lambda_hat` from `fit`; its `sigma_sq_hat`/`rho_hat` are ignored.
pub fn estimate_sigma_rho(fit: &HeckmanFit, data: &Dataset, probit: &ProbitFit) -> SigmaRho {
    let m = data.m() as f64;
    let mse = fit.residuals(data).norm_squared() / m;
    let index = observed_index(data, &probit.gamma_hat);
    let correction: f64 = index
        .iter()
        .zip(fit.lambda_hat.iter())
        .map(|(&a, &l)| l * (-a) - l * l)
        .sum();
    let sigma_sq = mse - fit.beta_h_hat * fit.beta_h_hat * correction / m;
    let rho = (sigma_sq > 0.0).then(|| fit.beta_h_hat / sigma_sq.sqrt());
    SigmaRho { sigma_sq, rho }
}

/// `1 − (1 − R²)(m − 1)/(m − j − 1)`; requires `m > j + 1`.
pub fn adjusted_r2(r2: f64, m: usize, j: usize) -> Result<f64> {
    if m <= j + 1 {
        return Err(Error::InsufficientSamples { m, j });
    }
    Ok(1.0 - (1.0 - r2) * (m - 1) as f64 / (m - j - 1) as f64)
}
