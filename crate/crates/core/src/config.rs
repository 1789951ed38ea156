use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[min, max]` that an acceptable `ρ̂` must fall in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoRange {
    pub min: f64,
    pub max: f64,
}

impl RhoRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let r = RhoRange { min, max };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidConfig(format!(
                "rho range [{}, {}] must satisfy min < max",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.min && rho <= self.max
    }
}

/// Hyperparameters of one assignment-learning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Initial probability `c` that any feature is assigned.
    pub init_c: f64,
    /// Training epochs `T`.
    pub epochs: usize,
    /// Learning rate `α`.
    pub learning_rate: f64,
    /// Softmax temperature `τ`.
    pub temperature: f64,
    /// Gumbel-Softmax samples `B` drawn during extraction.
    pub samples: usize,
    pub rho_range: RhoRange,
    pub seed: u64,
    /// Keep a snapshot of the assigned-probability row in every trace record.
    #[serde(default)]
    pub record_pi: bool,
}

impl RunConfig {
    pub const DEFAULT_INIT_C: f64 = 0.75;
    pub const DEFAULT_EPOCHS: usize = 4000;
    pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
    pub const DEFAULT_TEMPERATURE: f64 = 1.0;
    pub const DEFAULT_SAMPLES: usize = 1000;

    /// Defaults for everything except the `ρ` range, which has none.
    pub fn new(rho_range: RhoRange, seed: u64) -> Self {
        RunConfig {
            init_c: Self::DEFAULT_INIT_C,
            epochs: Self::DEFAULT_EPOCHS,
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            temperature: Self::DEFAULT_TEMPERATURE,
            samples: Self::DEFAULT_SAMPLES,
            rho_range,
            seed,
            record_pi: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.init_c > 0.0 && self.init_c < 1.0) {
            return bad(format!("c = {} must lie in (0, 1)", self.init_c));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be a non-negative number", self.learning_rate));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad(format!("temperature {} must be positive", self.temperature));
        }
        if self.samples == 0 {
            return bad("sample count B must be at least 1".into());
        }
        self.rho_range.validate()
    }
}
