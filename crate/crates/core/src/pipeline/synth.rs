//! Synthetic data from the selection model with known parameters.
//!
//! Row `i`: `x_i ~ N(0, I_K)`, `(u_p, u_s)` bivariate normal with variances
//! `(σ², 1)` and correlation `ρ`, `d_i = γ_0 + x_i γ + u_s`, `s_i = [d_i > 0]`,
//! `y_i = β_0 + x_i β + u_p`.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bias::SealedOutcomes;
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub k: usize,
    pub true_mask: FeatureMask,
    /// Intercept then one coefficient per feature; zero off the mask.
    pub beta: Vec<f64>,
    /// Intercept then one coefficient per feature.
    pub gamma: Vec<f64>,
    pub rho: f64,
    pub sigma: f64,
}

const BETA_PATTERN: [f64; 4] = [1.0, -0.5, 0.8, 0.6];
const GAMMA_PREDICTION: [f64; 4] = [0.3, -0.2, 0.25, 0.2];
const GAMMA_EXCLUSION: [f64; 2] = [1.0, -0.8];

impl SyntheticSpec {
    /// A well-identified default: the first `max(1, K - 2)` features predict
    /// the outcome, the rest enter only the selection equation strongly.
    pub fn standard(n: usize, k: usize, rho: f64) -> Self {
        let j = k.saturating_sub(2).max(1);
        let mut beta = vec![1.0];
        let mut gamma = vec![0.2];
        for f in 0..k {
            if f < j {
                beta.push(BETA_PATTERN[f % 4]);
                gamma.push(GAMMA_PREDICTION[f % 4]);
            } else {
                beta.push(0.0);
                gamma.push(GAMMA_EXCLUSION[(f - j) % 2]);
            }
        }
        SyntheticSpec {
            n,
            k,
            true_mask: FeatureMask::from_indices(k, &(0..j).collect::<Vec<_>>()).expect("j >= 1"),
            beta,
            gamma,
            rho,
            sigma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k < 2 || self.n < 1 {
            return bad(format!("synthetic spec needs n >= 1 and K >= 2, got n = {}, K = {}", self.n, self.k));
        }
        if self.true_mask.k() != self.k {
            return bad(format!("true mask covers {} features, K = {}", self.true_mask.k(), self.k));
        }
        if self.beta.len() != self.k + 1 || self.gamma.len() != self.k + 1 {
            return bad(format!("beta and gamma need K + 1 = {} entries", self.k + 1));
        }
        if let Some(f) = (0..self.k).find(|&f| !self.true_mask.is_assigned(f) && self.beta[f + 1] != 0.0) {
            return bad(format!("beta is nonzero at feature {f}, which is off the true mask"));
        }
        if self.beta.iter().chain(&self.gamma).any(|v| !v.is_finite()) {
            return bad("beta and gamma must be finite".into());
        }
        if !(self.rho.abs() < 1.0) {
            return bad(format!("rho = {} must satisfy |rho| < 1", self.rho));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma = {} must be positive", self.sigma));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        (1..=self.k).map(|i| format!("x{i}")).collect()
    }
}

/// Generator parameters and realized noise. Written to a sidecar file for
/// evaluation; never an input to fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub spec: SyntheticSpec,
    pub seed: u64,
    /// Realized `u_p`, `u_s` and selection, in generation order.
    pub u_p: Vec<f64>,
    pub u_s: Vec<f64>,
    pub selected: Vec<bool>,
    #[serde(skip)]
    pub(crate) hidden: SealedOutcomes,
}

impl SyntheticTruth {
    pub fn true_mask(&self) -> &FeatureMask {
        &self.spec.true_mask
    }

    pub fn hidden_outcomes(&self) -> &SealedOutcomes {
        &self.hidden
    }
}

struct Row {
    x: Vec<f64>,
    y: f64,
    u_p: f64,
    u_s: f64,
    selected: bool,
}

fn draw_row(spec: &SyntheticSpec, seed: u64, i: usize) -> Row {
    let mut rng = stream_rng(seed, Stream::Synthesize, i as u64);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let x: Vec<f64> = (0..spec.k).map(|_| normal()).collect();
    let (z1, z2) = (normal(), normal());
    // Cholesky factor of [[σ², ρσ], [ρσ, 1]]
    let u_p = spec.sigma * z1;
    let u_s = spec.rho * z1 + (1.0 - spec.rho * spec.rho).sqrt() * z2;
    let dot = |c: &[f64]| c[0] + x.iter().zip(&c[1..]).map(|(a, b)| a * b).sum::<f64>();
    let d = dot(&spec.gamma) + u_s;
    let y = dot(&spec.beta) + u_p;
    Row {
        y,
        u_p,
        u_s,
        selected: d > 0.0,
        x,
    }
}

fn draw_rows(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Row>> {
    spec.validate()?;
    Ok((0..spec.n).into_par_iter().map(|i| draw_row(spec, seed, i)).collect())
}

fn features(rows: &[Row], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), k, |i, j| rows[i].x[j])
}

/// Draws `n` rows and hides the outcomes of unselected ones.
pub fn synthesize(spec: &SyntheticSpec, seed: u64) -> Result<(Dataset, SyntheticTruth)> {
    let rows = draw_rows(spec, seed)?;
    let outcomes: Vec<Option<f64>> = rows.iter().map(|r| r.selected.then_some(r.y)).collect();
    let data = Dataset::from_rows(features(&rows, spec.k), &outcomes, spec.feature_names(), Vec::new())?;
    let hidden = SealedOutcomes {
        values: data.row_order()[data.m()..].iter().map(|&i| rows[i].y).collect(),
    };
    let truth = SyntheticTruth {
        spec: spec.clone(),
        seed,
        u_p: rows.iter().map(|r| r.u_p).collect(),
        u_s: rows.iter().map(|r| r.u_s).collect(),
        selected: rows.iter().map(|r| r.selected).collect(),
        hidden,
    };
    Ok((data, truth))
}

/// Draws `n` rows from the same model with every outcome observed, as a
/// population sample for testing.
pub fn synthesize_population(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    let rows = draw_rows(spec, seed)?;
    let y = rows.iter().map(|r| r.y).collect();
    Dataset::new(features(&rows, spec.k), y, spec.feature_names())
}
