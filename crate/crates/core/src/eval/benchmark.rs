use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{run_each, run_methods, EvalReport, Scenario};
use super::ttest::{paired_t_test, PairedTestResult};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::extraction::Method;
use crate::rng::{derive_seed, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub run: RunConfig,
    pub methods: Vec<Method>,
    /// Re-runs of every method under derived seeds, for the paired t-tests.
    pub repeats: usize,
    /// Sensitivity grid `c × T` at the run's `B`.
    pub grid_c: Vec<f64>,
    pub grid_t: Vec<usize>,
    /// Runtime grid `T × B` at the run's `c`.
    pub grid_b: Vec<usize>,
}

impl BenchmarkConfig {
    pub fn new(run: RunConfig, methods: Vec<Method>) -> Self {
        BenchmarkConfig {
            run,
            methods,
            repeats: 0,
            grid_c: Vec::new(),
            grid_t: Vec::new(),
            grid_b: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("benchmark method list is empty".into()));
        }
        let mut seen = self.methods.clone();
        seen.sort_by_key(|m| m.tag());
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(Error::InvalidConfig("benchmark method list has duplicates".into()));
        }
        if self.repeats == 1 {
            return Err(Error::InvalidConfig("repeats must be 0 or at least 2".into()));
        }
        for &c in &self.grid_c {
            RunConfig { init_c: c, ..self.run.clone() }.validate()?;
        }
        Ok(())
    }
}

/// One Heckman-FA run at a grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub init_c: f64,
    pub epochs: usize,
    pub samples: usize,
    pub test_mse: Option<f64>,
    pub rho_hat: Option<f64>,
    pub error: Option<String>,
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// The method Heckman-FA is compared against.
    pub baseline: Method,
    pub pairs: usize,
    pub result: std::result::Result<PairedTestResult, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutput {
    pub reports: Vec<EvalReport>,
    /// Methods that produced no report, with the reason.
    pub failures: Vec<(Method, String)>,
    /// Test MSE per method per repeat; `None` where the run failed.
    pub repeat_test_mse: Vec<(Method, Vec<Option<f64>>)>,
    pub comparisons: Vec<Comparison>,
    pub sensitivity: Vec<GridCell>,
    pub runtime_grid: Vec<GridCell>,
}

fn fa_cell(scenario: &Scenario, base: &RunConfig, init_c: f64, epochs: usize, samples: usize) -> GridCell {
    let config = RunConfig {
        init_c,
        epochs,
        samples,
        record_pi: false,
        ..base.clone()
    };
    let started = Instant::now();
    let outcome = run_methods(scenario, &[Method::Fa], &config);
    let runtime_seconds = started.elapsed().as_secs_f64();
    let (test_mse, rho_hat, error) = match outcome {
        Ok(runs) => (Some(runs[0].report.test_mse), runs[0].report.rho_hat, None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    GridCell {
        init_c,
        epochs,
        samples,
        test_mse,
        rho_hat,
        error,
        runtime_seconds,
    }
}

/// Sensitivity cells run in parallel, each on its own copy of the scenario;
/// runtime cells run one at a time so their wall-clock times are comparable.
pub fn benchmark(scenario: &Scenario, config: &BenchmarkConfig) -> Result<BenchmarkOutput> {
    config.validate()?;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (method, run) in run_each(scenario, &config.methods, &config.run)? {
        match run {
            Ok(run) => reports.push(run.report),
            Err(e) => failures.push((method, e.to_string())),
        }
    }

    let repeat_runs: Vec<Vec<Option<f64>>> = (0..config.repeats)
        .into_par_iter()
        .map(|r| {
            let run = RunConfig {
                seed: derive_seed(config.run.seed, Stream::Benchmark, r as u64),
                ..config.run.clone()
            };
            let local = scenario.clone();
            match run_each(&local, &config.methods, &run) {
                Ok(runs) => runs
                    .into_iter()
                    .map(|(_, r)| r.ok().map(|r| r.report.test_mse))
                    .collect(),
                Err(_) => vec![None; config.methods.len()],
            }
        })
        .collect();
    let repeat_test_mse: Vec<(Method, Vec<Option<f64>>)> = config
        .methods
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, repeat_runs.iter().map(|row| row[i]).collect()))
        .collect();

    let comparisons = match repeat_test_mse.iter().find(|(m, _)| *m == Method::Fa) {
        Some((_, fa)) if config.repeats >= 2 => repeat_test_mse
            .iter()
            .filter(|(m, _)| *m != Method::Fa)
            .map(|(m, other)| compare(*m, fa, other))
            .collect(),
        _ => Vec::new(),
    };

    let sensitivity = config
        .grid_c
        .iter()
        .flat_map(|&c| config.grid_t.iter().map(move |&t| (c, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, t)| fa_cell(&scenario.clone(), &config.run, c, t, config.run.samples))
        .collect();

    let runtime_grid = config
        .grid_t
        .iter()
        .flat_map(|&t| config.grid_b.iter().map(move |&b| (t, b)))
        .map(|(t, b)| fa_cell(scenario, &config.run, config.run.init_c, t, b))
        .collect();

    Ok(BenchmarkOutput {
        reports,
        failures,
        repeat_test_mse,
        comparisons,
        sensitivity,
        runtime_grid,
    })
}

fn compare(baseline: Method, fa: &[Option<f64>], other: &[Option<f64>]) -> Comparison {
    let (a, b): (Vec<f64>, Vec<f64>) = fa
        .iter()
        .zip(other)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .unzip();
    Comparison {
        baseline,
        pairs: a.len(),
        result: if a.len() < 2 {
            Err(format!("only {} repeat(s) where both methods produced a result", a.len()))
        } else {
            paired_t_test(&a, &b).map_err(|e| e.to_string())
        },
    }
}
