//! The experiment file: TOML with `[run]`, `[data]`, `[synth]` and
//! `[benchmark]` sections. Hyperparameters have no silent defaults here;
//! a run records every value it used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use heckfa::config::{RhoRange, RunConfig};
use heckfa::extraction::Method;
use heckfa::pipeline::{BiasRule, Schema, SyntheticSpec};
use heckfa::FeatureMask;

use crate::error::{config_error, CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub c: f64,
    #[serde(rename = "T")]
    pub epochs: usize,
    pub alpha: f64,
    pub tau: f64,
    #[serde(rename = "B")]
    pub samples: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    pub outcome: String,
    pub features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aux: Vec<String>,
    /// Separate fully observed test file; without it `path` is split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardize: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Intercept then K coefficients; the true mask is its nonzero slopes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Rows of the population test sample used when this section is the
    /// data source of `run` or `benchmark`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_n: Option<usize>,
    /// Write every outcome instead of hiding unselected ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observe_all: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardize: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub methods: Vec<String>,
    #[serde(default)]
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_t: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_b: Vec<usize>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| config_error(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| heckfa::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut file = Self::parse(&text).map_err(|e| match e {
            CliError::Core(heckfa::Error::InvalidConfig(msg)) => {
                config_error(format!("{}: {msg}", path.display()))
            }
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        file.resolve_paths(base);
        Ok(file)
    }

    /// Makes data paths absolute relative to `base`, so a saved snapshot
    /// works from any directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                let joined = base.join(&*p);
                *p = std::path::absolute(&joined).unwrap_or(joined);
            }
        };
        if let Some(d) = self.data.as_mut() {
            fix(&mut d.path);
            if let Some(t) = d.test_path.as_mut() {
                fix(t);
            }
        }
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Core(heckfa::Error::Serialization(e.to_string())))
    }

    pub fn run_section(&self) -> CliResult<&RunSection> {
        self.run.as_ref().ok_or_else(|| config_error("missing section [run]"))
    }
}

impl RunSection {
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let seed = self.seed.ok_or_else(|| config_error("missing field `seed` in [run] (or pass --seed)"))?;
        let config = RunConfig {
            init_c: self.c,
            epochs: self.epochs,
            learning_rate: self.alpha,
            temperature: self.tau,
            samples: self.samples,
            rho_range: RhoRange::new(self.rho_min, self.rho_max)?,
            seed,
            record_pi: true,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_method(name: &str) -> CliResult<Method> {
    name.parse::<Method>().map_err(CliError::from)
}

impl DataSection {
    pub fn schema(&self) -> Schema {
        Schema {
            outcome: self.outcome.clone(),
            features: self.features.clone(),
            selection: self.selection.clone(),
            aux: self.aux.clone(),
        }
    }

    pub fn bias_rule(&self) -> CliResult<Option<BiasRule>> {
        Ok(self.bias_rule.as_deref().map(str::parse).transpose()?)
    }
}

impl SynthSection {
    pub fn spec(&self) -> CliResult<SyntheticSpec> {
        let mut spec = SyntheticSpec::standard(self.n, self.k, self.rho);
        if let Some(sigma) = self.sigma {
            spec.sigma = sigma;
        }
        match (&self.beta, &self.gamma) {
            (None, None) => {}
            (Some(beta), Some(gamma)) => {
                if beta.len() != self.k + 1 {
                    return Err(config_error(format!("[synth] beta needs K + 1 = {} entries", self.k + 1)));
                }
                let on: Vec<usize> = (0..self.k).filter(|&f| beta[f + 1] != 0.0).collect();
                spec.true_mask = FeatureMask::from_indices(self.k, &on)
                    .map_err(|_| config_error("[synth] beta has no nonzero slope"))?;
                spec.beta = beta.clone();
                spec.gamma = gamma.clone();
            }
            _ => return Err(config_error("[synth] beta and gamma must be given together")),
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("synthetic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[run]
c = 0.75
T = 50
alpha = 0.1
tau = 1.0
B = 20
rho_min = 0.1
rho_max = 0.9
seed = 3

[synth]
n = 500
k = 4
rho = 0.5
"#;

    #[test]
    fn round_trip() {
        let f = ExperimentFile::parse(FULL).unwrap();
        let again = ExperimentFile::parse(&f.to_toml().unwrap()).unwrap();
        assert_eq!(f, again);
        let rc = f.run_section().unwrap().run_config().unwrap();
        assert_eq!(rc.epochs, 50);
        assert_eq!(rc.samples, 20);
    }

    #[test]
    fn missing_epochs_is_named() {
        let text = FULL.replace("T = 50\n", "");
        let err = ExperimentFile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("`T`"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = FULL.replace("tau = 1.0", "tau = 1.0\ntemp = 2");
        assert!(ExperimentFile::parse(&text).is_err());
    }

    #[test]
    fn empty_rho_range_rejected() {
        let text = FULL.replace("rho_max = 0.9", "rho_max = 0.1");
        let f = ExperimentFile::parse(&text).unwrap();
        assert!(f.run_section().unwrap().run_config().is_err());
    }
}
