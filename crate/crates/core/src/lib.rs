//! Heckman two-step estimation with learned prediction-feature assignment.
//!
//! The two-step estimator corrects a linear outcome model for samples whose
//! outcome is missing not at random. [`assignment`] learns, per selection
//! feature, the probability that it also belongs in the outcome equation;
//! [`extraction`] turns those probabilities into a final feature set.

pub mod assignment;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod extraction;
pub mod linalg;
pub mod pipeline;
pub mod rng;
pub mod selection;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use config::{RhoRange, RunConfig};
pub use dataset::{AuxColumn, Dataset, FeatureMask};
pub use error::{Error, Result};
pub use extraction::{ExtractionResult, Method, RhoSummary};
pub use selection::{fit_heckman, fit_probit, HeckmanFit, ProbitFit};
