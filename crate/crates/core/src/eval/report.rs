use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{fit_naive_ols, mse, test_mse, HoldoutSet, NaiveFit, Predictor};
use crate::assignment::{train_assignment_with_stage, AssignmentProbabilities, TrainTrace};
use crate::config::RunConfig;
use crate::dataset::{Dataset, FeatureMask};
use crate::error::Result;
use crate::extraction::{
    extract_fa_star_with_stage, extract_fa_with_stage, extract_heckman_c_with_stage, ExtractionResult, Method,
};
use crate::pipeline::{inject_bias, split, standardize, BiasRule, SealedOutcomes, SplitSpec, Standardizer};
use crate::selection::{selection_stage, HeckmanFit, SelectionStage};

/// Training data under selection plus a fully observed test set, both on
/// the same feature scale.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub train: Dataset,
    pub test: HoldoutSet,
    pub standardizer: Option<Standardizer>,
    pub sealed: SealedOutcomes,
}

impl Scenario {
    /// Standardization statistics come from all `n` training rows and are
    /// reused unchanged on the test rows.
    pub fn new(train: Dataset, test: Dataset, standardize_features: bool) -> Result<Self> {
        let (train, test, standardizer) = if standardize_features {
            let (train, st) = standardize(&train)?;
            let test = st.apply(&test)?;
            (train, test, Some(st))
        } else {
            (train, test, None)
        };
        Ok(Scenario {
            train,
            test: HoldoutSet::new(test)?,
            standardizer,
            sealed: SealedOutcomes::default(),
        })
    }

    /// Split a fully observed dataset, then hide training outcomes by `rule`.
    pub fn from_population(
        full: &Dataset,
        split_spec: &SplitSpec,
        rule: Option<&BiasRule>,
        standardize_features: bool,
    ) -> Result<Self> {
        let (train, test) = split(full, split_spec)?;
        let (train, sealed) = match rule {
            Some(rule) => inject_bias(&train, rule)?,
            None => (train, SealedOutcomes::default()),
        };
        let mut scenario = Scenario::new(train, test, standardize_features)?;
        scenario.sealed = sealed;
        Ok(scenario)
    }
}

/// One method's evaluation. `train_mse` is in-sample on the observed rows
/// and includes the `β̂_H λ̂` term for Heckman fits; `train_mse_linear`
/// leaves it out. Test predictions never use it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub train_mse: f64,
    pub train_mse_linear: f64,
    pub test_mse: f64,
    pub rho_hat: Option<f64>,
    pub r2_adj: f64,
    pub mask: FeatureMask,
    pub accepted_count: Option<usize>,
    pub runtime_seconds: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub enum FittedModel {
    Naive(NaiveFit),
    Heckman(Box<HeckmanFit>),
}

#[derive(Clone, Debug)]
pub struct MethodRun {
    pub report: EvalReport,
    pub model: FittedModel,
    pub pi: Option<AssignmentProbabilities>,
    pub trace: Option<TrainTrace>,
    pub extraction: Option<ExtractionResult>,
}

fn report_test_mse(model: &dyn Predictor, test: &HoldoutSet) -> f64 {
    let before = test.reads();
    let value = test_mse(model, test);
    assert_eq!(test.reads(), before + 1, "test outcomes must be read exactly once per report");
    value
}

fn naive_run(scenario: &Scenario, config: &RunConfig, started: Instant) -> Result<MethodRun> {
    let fit = fit_naive_ols(&scenario.train, &FeatureMask::all(scenario.train.k()))?;
    let test = report_test_mse(&fit, &scenario.test);
    let report = EvalReport {
        method: Method::Naive,
        train_mse: fit.train_mse,
        train_mse_linear: fit.train_mse,
        test_mse: test,
        rho_hat: None,
        r2_adj: fit.r2_adj,
        mask: fit.mask.clone(),
        accepted_count: None,
        runtime_seconds: started.elapsed().as_secs_f64(),
        seed: config.seed,
    };
    Ok(MethodRun {
        report,
        model: FittedModel::Naive(fit),
        pi: None,
        trace: None,
        extraction: None,
    })
}

fn heckman_run(
    scenario: &Scenario,
    config: &RunConfig,
    extraction: ExtractionResult,
    pi: Option<(AssignmentProbabilities, TrainTrace)>,
    runtime_seconds: f64,
) -> MethodRun {
    let data = &scenario.train;
    let fit = &extraction.fit;
    let linear = fit.linear_part(data, data.m());
    let report = EvalReport {
        method: extraction.method,
        train_mse: mse(data.y_observed(), &fit.fitted(data)),
        train_mse_linear: mse(data.y_observed(), &linear),
        test_mse: report_test_mse(fit, &scenario.test),
        rho_hat: fit.rho_hat,
        r2_adj: fit.r2_adj,
        mask: fit.mask.clone(),
        accepted_count: Some(extraction.accepted_count),
        runtime_seconds,
        seed: config.seed,
    };
    let (pi, trace) = pi.map_or((None, None), |(p, t)| (Some(p), Some(t)));
    MethodRun {
        report,
        model: FittedModel::Heckman(Box::new(extraction.fit.clone())),
        pi,
        trace,
        extraction: Some(extraction),
    }
}

/// Runs `methods` in order on one scenario, stopping at the first failure.
pub fn run_methods(scenario: &Scenario, methods: &[Method], config: &RunConfig) -> Result<Vec<MethodRun>> {
    run_each(scenario, methods, config)?
        .into_iter()
        .map(|(_, run)| run)
        .collect()
}

/// Runs every method in `methods` and keeps each method's own outcome.
/// Heckman-FA and Heckman-FA* share a single training run; each reports the
/// probit, training and its own extraction time. Failures of the shared
/// stages abort the whole call.
pub fn run_each(
    scenario: &Scenario,
    methods: &[Method],
    config: &RunConfig,
) -> Result<Vec<(Method, Result<MethodRun>)>> {
    config.validate()?;
    let mut stage: Option<(SelectionStage, f64)> = None;
    let mut trained: Option<(AssignmentProbabilities, TrainTrace, f64)> = None;
    let mut runs = Vec::with_capacity(methods.len());
    for &method in methods {
        let started = Instant::now();
        if method == Method::Naive {
            runs.push((method, naive_run(scenario, config, started)));
            continue;
        }
        if stage.is_none() {
            let t = Instant::now();
            let s = selection_stage(&scenario.train)?;
            stage = Some((s, t.elapsed().as_secs_f64()));
        }
        let (stage, stage_secs) = stage.as_ref().expect("set above");
        let run = match method {
            Method::Fa | Method::FaStar => {
                if trained.is_none() {
                    let t = Instant::now();
                    let (pi, trace) = train_assignment_with_stage(&scenario.train, stage, config)?;
                    trained = Some((pi, trace, t.elapsed().as_secs_f64()));
                }
                let (pi, trace, train_secs) = trained.as_ref().expect("set above");
                let t = Instant::now();
                let extraction = if method == Method::Fa {
                    extract_fa_with_stage(&scenario.train, stage, pi, config)
                } else {
                    extract_fa_star_with_stage(&scenario.train, stage, pi, config)
                };
                extraction.map(|x| {
                    let secs = stage_secs + train_secs + t.elapsed().as_secs_f64();
                    heckman_run(scenario, config, x, Some((pi.clone(), trace.clone())), secs)
                })
            }
            Method::HeckmanC => {
                let t = Instant::now();
                extract_heckman_c_with_stage(&scenario.train, stage, config)
                    .map(|x| heckman_run(scenario, config, x, None, stage_secs + t.elapsed().as_secs_f64()))
            }
            Method::Naive => unreachable!(),
        };
        runs.push((method, run));
    }
    Ok(runs)
}
