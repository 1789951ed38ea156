//! Probit selection stage fitted by Newton–Raphson.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::normal::{inverse_mills, std_normal_cdf};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Probabilities inside the log-likelihood are clamped to `[P, 1 - P]`.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbitFit {
    /// Coefficients `γ̂`, intercept first.
    pub gamma_hat: DVector<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ProbitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the max-norm of the score.
    pub tolerance: f64,
    pub max_step_halvings: usize,
}

impl Default for ProbitOptions {
    fn default() -> Self {
        ProbitOptions {
            max_iterations: 100,
            tolerance: 1e-8,
            max_step_halvings: 60,
        }
    }
}

/// Fits the selection equation on all `n` samples with an intercept prepended
/// to the selection features.
pub fn fit_probit(data: &Dataset) -> Result<ProbitFit> {
    probit_mle(&data.selection_design(), &data.selection_indicator(), ProbitOptions::default())
}

/// Clamped probit log-likelihood `Σ s log Φ(xγ) + (1 - s) log Φ(-xγ)`.
pub fn probit_log_likelihood(design: &DMatrix<f64>, s: &[bool], gamma: &DVector<f64>) -> f64 {
    let eta = design * gamma;
    eta.iter()
        .zip(s)
        .map(|(&e, &sel)| {
            let p = std_normal_cdf(if sel { e } else { -e });
            p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP).ln()
        })
        .sum()
}

/// Gradient of the (unclamped) log-likelihood with respect to `γ`.
pub fn probit_score(design: &DMatrix<f64>, s: &[bool], gamma: &DVector<f64>) -> DVector<f64> {
    let eta = design * gamma;
    let g = DVector::from_iterator(
        eta.len(),
        eta.iter().zip(s).map(|(&e, &sel)| {
            let q = if sel { 1.0 } else { -1.0 };
            q * inverse_mills(q * e)
        }),
    );
    design.tr_mul(&g)
}

/// Maximum-likelihood probit coefficients for an arbitrary design matrix.
pub fn probit_mle(design: &DMatrix<f64>, s: &[bool], opts: ProbitOptions) -> Result<ProbitFit> {
    let (n, p) = design.shape();
    assert_eq!(n, s.len(), "design rows must match selection indicator");
    let ones = s.iter().filter(|&&v| v).count();
    if ones == 0 {
        return Err(Error::DegenerateSelection { value: 0 });
    }
    if ones == n {
        return Err(Error::DegenerateSelection { value: 1 });
    }

    let mut gamma = DVector::zeros(p);
    let mut ll = probit_log_likelihood(design, s, &gamma);
    let mut gradient_norm = f64::INFINITY;

    for iteration in 0..=opts.max_iterations {
        let eta = design * &gamma;
        let mut score_terms = DVector::zeros(n);
        let mut weights = DVector::zeros(n);
        for i in 0..n {
            let q = if s[i] { 1.0 } else { -1.0 };
            let t = q * eta[i];
            let lambda = inverse_mills(t);
            score_terms[i] = q * lambda;
            // negative Hessian weight λ(t)(λ(t) + t), which lies in (0, 1)
            weights[i] = (lambda * (lambda + t)).clamp(0.0, 1.0);
        }
        let score = design.tr_mul(&score_terms);
        gradient_norm = score.amax();
        if !gradient_norm.is_finite() {
            break;
        }
        if gradient_norm < opts.tolerance {
            return Ok(ProbitFit {
                gamma_hat: gamma,
                log_likelihood: ll,
                iterations: iteration,
                converged: true,
            });
        }
        if iteration == opts.max_iterations {
            break;
        }

        let mut weighted = design.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= weights[i];
        }
        let information = design.tr_mul(&weighted);
        let Some(chol) = information.cholesky() else {
            break;
        };
        let step = chol.solve(&score);

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_step_halvings {
            let candidate = &gamma + &step * scale;
            let candidate_ll = probit_log_likelihood(design, s, &candidate);
            if candidate_ll.is_finite() && candidate_ll >= ll - 1e-12 * (1.0 + ll.abs()) {
                gamma = candidate;
                ll = candidate_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || gamma.iter().any(|v| !v.is_finite()) {
            break;
        }
    }

    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        gradient_norm,
    })
}
