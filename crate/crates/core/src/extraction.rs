//! Choosing the final prediction features from a trained `π̂`.
//!
//! A candidate mask is acceptable when its Heckman fit yields a defined `ρ̂`
//! inside the configured range; among acceptable candidates the one with the
//! largest adjusted R² wins, earliest candidate first on ties.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{draw_gumbel, AssignmentProbabilities};
use crate::config::{RhoRange, RunConfig};
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::selection::{fit_outcome, selection_stage, HeckmanFit, SelectionStage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "FA")]
    Fa,
    #[serde(rename = "FA_STAR")]
    FaStar,
    #[serde(rename = "HECKMAN_C")]
    HeckmanC,
    #[serde(rename = "NAIVE")]
    Naive,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Naive, Method::Fa, Method::FaStar, Method::HeckmanC];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::Fa => "FA",
            Method::FaStar => "FA_STAR",
            Method::HeckmanC => "HECKMAN_C",
            Method::Naive => "NAIVE",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Method::Fa => "Heckman-FA",
            Method::FaStar => "Heckman-FA*",
            Method::HeckmanC => "Heckman-C",
            Method::Naive => "Naive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '*'], "_").as_str() {
            "FA" | "HECKMAN_FA" => Ok(Method::Fa),
            "FA_STAR" | "FA_" | "HECKMAN_FA_" | "HECKMAN_FA_STAR" => Ok(Method::FaStar),
            "HECKMAN_C" | "C" => Ok(Method::HeckmanC),
            "NAIVE" | "OLS" => Ok(Method::Naive),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// Distribution of `ρ̂` over the candidates an extraction examined.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RhoSummary {
    pub candidates: usize,
    pub all_zero: usize,
    pub unfittable: usize,
    pub undefined_rho: usize,
    pub in_range: usize,
    pub rho_min: Option<f64>,
    pub rho_median: Option<f64>,
    pub rho_max: Option<f64>,
    pub range: Option<RhoRange>,
}

impl RhoSummary {
    fn from_evaluations(evals: &[CandidateEval], range: RhoRange) -> Self {
        let mut rhos: Vec<f64> = evals.iter().filter_map(|e| e.rho()).collect();
        rhos.sort_by(f64::total_cmp);
        let median = (!rhos.is_empty()).then(|| {
            let h = rhos.len() / 2;
            if rhos.len() % 2 == 1 {
                rhos[h]
            } else {
                0.5 * (rhos[h - 1] + rhos[h])
            }
        });
        RhoSummary {
            candidates: evals.len(),
            all_zero: evals.iter().filter(|e| matches!(e.status, CandidateStatus::AllZero)).count(),
            unfittable: evals.iter().filter(|e| matches!(e.status, CandidateStatus::Unfittable(_))).count(),
            undefined_rho: evals
                .iter()
                .filter(|e| matches!(e.status, CandidateStatus::Fitted { rho: None, .. }))
                .count(),
            in_range: evals.iter().filter(|e| e.accepted(range)).count(),
            rho_min: rhos.first().copied(),
            rho_median: median,
            rho_max: rhos.last().copied(),
            range: Some(range),
        }
    }
}

impl fmt::Display for RhoSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        write!(
            f,
            "{} candidates ({} all-zero, {} unfittable, {} undefined rho); rho min {} / median {} / max {}",
            self.candidates,
            self.all_zero,
            self.unfittable,
            self.undefined_rho,
            opt(self.rho_min),
            opt(self.rho_median),
            opt(self.rho_max),
        )?;
        if let Some(r) = self.range {
            write!(f, "; required range [{}, {}]", r.min, r.max)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CandidateStatus {
    AllZero,
    /// Singular design or too few observed samples for this mask.
    Unfittable(String),
    Fitted { rho: Option<f64>, r2_adj: f64 },
}

/// One examined candidate, in examination order.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateEval {
    pub index: usize,
    pub mask: Option<FeatureMask>,
    pub status: CandidateStatus,
}

impl CandidateEval {
    pub fn rho(&self) -> Option<f64> {
        match self.status {
            CandidateStatus::Fitted { rho, .. } => rho,
            _ => None,
        }
    }

    pub fn r2_adj(&self) -> Option<f64> {
        match self.status {
            CandidateStatus::Fitted { r2_adj, .. } => Some(r2_adj),
            _ => None,
        }
    }

    pub fn accepted(&self, range: RhoRange) -> bool {
        self.rho().is_some_and(|r| range.contains(r))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub mask: FeatureMask,
    pub fit: HeckmanFit,
    pub accepted_count: usize,
    pub best_r2_adj: f64,
    pub method: Method,
    pub summary: RhoSummary,
}

fn evaluate(data: &Dataset, stage: &SelectionStage, index: usize, mask: Result<FeatureMask>) -> Result<CandidateEval> {
    let mask = match mask {
        Ok(mask) => mask,
        Err(Error::AllZeroMask) => {
            return Ok(CandidateEval {
                index,
                mask: None,
                status: CandidateStatus::AllZero,
            })
        }
        Err(e) => return Err(e),
    };
    let status = match fit_outcome(data, stage, &mask) {
        Ok(fit) => CandidateStatus::Fitted {
            rho: fit.rho_hat,
            r2_adj: fit.r2_adj,
        },
        Err(e @ (Error::SingularDesign { .. } | Error::InsufficientSamples { .. })) => {
            CandidateStatus::Unfittable(e.to_string())
        }
        Err(e) => return Err(e),
    };
    Ok(CandidateEval {
        index,
        mask: Some(mask),
        status,
    })
}

/// First-wins argmax of adjusted R² over accepted candidates, then a refit
/// of the winner.
fn select(
    data: &Dataset,
    stage: &SelectionStage,
    evals: &[CandidateEval],
    range: RhoRange,
    method: Method,
) -> Result<ExtractionResult> {
    let summary = RhoSummary::from_evaluations(evals, range);
    let mut best: Option<(&CandidateEval, f64)> = None;
    for e in evals.iter().filter(|e| e.accepted(range)) {
        let r2 = e.r2_adj().expect("accepted candidates are fitted");
        if best.is_none_or(|(_, b)| r2 > b) {
            best = Some((e, r2));
        }
    }
    let Some((winner, best_r2_adj)) = best else {
        return Err(Error::NoCandidateInRange { summary });
    };
    let mask = winner.mask.clone().expect("fitted candidates carry a mask");
    let fit = fit_outcome(data, stage, &mask)?;
    Ok(ExtractionResult {
        mask,
        fit,
        accepted_count: summary.in_range,
        best_r2_adj,
        method,
        summary,
    })
}

/// Evaluates the `B` Gumbel-sampled candidates of a Heckman-FA extraction.
/// Candidate `b` draws from its own seed address, so the result does not
/// depend on evaluation order or thread count.
pub fn fa_candidates(
    data: &Dataset,
    stage: &SelectionStage,
    pi_hat: &AssignmentProbabilities,
    config: &RunConfig,
) -> Result<Vec<CandidateEval>> {
    (0..config.samples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(config.seed, Stream::Extract, b as u64);
            let draw = draw_gumbel(pi_hat, config.temperature, &mut rng);
            evaluate(data, stage, b, draw.mask())
        })
        .collect()
}

/// Heckman-FA extraction: best of `B` masks sampled from `π̂`.
pub fn extract_fa(data: &Dataset, pi_hat: &AssignmentProbabilities, config: &RunConfig) -> Result<ExtractionResult> {
    let stage = selection_stage(data)?;
    extract_fa_with_stage(data, &stage, pi_hat, config)
}

pub fn extract_fa_with_stage(
    data: &Dataset,
    stage: &SelectionStage,
    pi_hat: &AssignmentProbabilities,
    config: &RunConfig,
) -> Result<ExtractionResult> {
    config.validate()?;
    if pi_hat.k() != data.k() {
        return Err(Error::InvalidProbabilities(format!(
            "pi covers {} features, data has {}",
            pi_hat.k(),
            data.k()
        )));
    }
    let evals = fa_candidates(data, stage, pi_hat, config)?;
    select(data, stage, &evals, config.rho_range, Method::Fa)
}

/// Feature indices by descending `π̂_2k`, ties by ascending index.
pub fn rank_by_pi(pi_hat: &AssignmentProbabilities) -> Vec<usize> {
    rank_descending(&pi_hat.assigned_row())
}

fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Evaluates the top-`J` prefixes of `order` for `J = 1..K-1`.
pub fn prefix_candidates(data: &Dataset, stage: &SelectionStage, order: &[usize]) -> Result<Vec<CandidateEval>> {
    let k = data.k();
    (1..k)
        .into_par_iter()
        .map(|j| evaluate(data, stage, j, FeatureMask::from_indices(k, &order[..j])))
        .collect()
}

/// Heckman-FA*: sweep prefixes of the `π̂` ranking.
pub fn extract_fa_star(
    data: &Dataset,
    pi_hat: &AssignmentProbabilities,
    config: &RunConfig,
) -> Result<ExtractionResult> {
    let stage = selection_stage(data)?;
    extract_fa_star_with_stage(data, &stage, pi_hat, config)
}

pub fn extract_fa_star_with_stage(
    data: &Dataset,
    stage: &SelectionStage,
    pi_hat: &AssignmentProbabilities,
    config: &RunConfig,
) -> Result<ExtractionResult> {
    config.rho_range.validate()?;
    let evals = prefix_candidates(data, stage, &rank_by_pi(pi_hat))?;
    select(data, stage, &evals, config.rho_range, Method::FaStar)
}

/// Pearson correlation of each feature with the outcome over the observed
/// rows; zero-variance columns get 0.
pub fn outcome_correlations(data: &Dataset) -> Vec<f64> {
    let y = data.y_observed();
    let m = data.m() as f64;
    let y_mean = y.mean();
    let y_dev: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let y_ss: f64 = y_dev.iter().map(|d| d * d).sum();
    (0..data.k())
        .map(|k| {
            let col = data.observed_column(k);
            let mean = col.sum() / m;
            let (mut cross, mut ss) = (0.0, 0.0);
            for (x, dy) in col.iter().zip(&y_dev) {
                let dx = x - mean;
                cross += dx * dy;
                ss += dx * dx;
            }
            if ss > 0.0 && y_ss > 0.0 {
                cross / (ss * y_ss).sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

/// Features by descending absolute outcome correlation, ties by index.
pub fn rank_by_correlation(data: &Dataset) -> Vec<usize> {
    let abs: Vec<f64> = outcome_correlations(data).iter().map(|c| c.abs()).collect();
    rank_descending(&abs)
}

/// Heckman-C baseline: the FA* sweep over the correlation ranking.
pub fn extract_heckman_c(data: &Dataset, config: &RunConfig) -> Result<ExtractionResult> {
    let stage = selection_stage(data)?;
    extract_heckman_c_with_stage(data, &stage, config)
}

pub fn extract_heckman_c_with_stage(
    data: &Dataset,
    stage: &SelectionStage,
    config: &RunConfig,
) -> Result<ExtractionResult> {
    config.rho_range.validate()?;
    if data.m() < 3 {
        return Err(Error::InsufficientSamples { m: data.m(), j: 1 });
    }
    let evals = prefix_candidates(data, stage, &rank_by_correlation(data))?;
    select(data, stage, &evals, config.rho_range, Method::HeckmanC)
}
