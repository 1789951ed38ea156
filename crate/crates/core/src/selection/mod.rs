//! The two-step selection estimator.

mod heckman;
mod normal;
mod probit;

pub use heckman::{
    adjusted_r2, estimate_sigma_rho, fit_heckman, fit_outcome, selection_stage, HeckmanFit,
    SelectionStage, SigmaRho,
};
pub(crate) use heckman::{coefficient_of_determination, linear_predictor};
pub use normal::{inverse_mills, std_normal_cdf, std_normal_pdf};
pub use probit::{
    fit_probit, probit_log_likelihood, probit_mle, probit_score, ProbitFit, ProbitOptions,
    PROBABILITY_CLAMP,
};
