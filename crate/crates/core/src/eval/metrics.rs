use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::pipeline::SealedOutcomes;
use crate::selection::{adjusted_r2, coefficient_of_determination, linear_predictor, HeckmanFit};

pub fn mse(y: &DVector<f64>, yhat: &DVector<f64>) -> f64 {
    (y - yhat).norm_squared() / y.len() as f64
}

pub fn mae(y: &DVector<f64>, yhat: &DVector<f64>) -> f64 {
    (y - yhat).abs().sum() / y.len() as f64
}

/// A fitted linear model usable on population data.
pub trait Predictor {
    fn mask(&self) -> &FeatureMask;
    /// Intercept then one coefficient per selection feature, zero off-mask.
    fn coefficients(&self) -> &DVector<f64>;

    /// `b_0 + x b` for every row of `x`.
    fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        linear_predictor(self.coefficients(), x)
    }
}

/// Heckman predictions on new data leave out `β̂_H λ̂`: that term is the
/// conditional mean shift of the selected sample only.
impl Predictor for HeckmanFit {
    fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    fn coefficients(&self) -> &DVector<f64> {
        &self.beta_hat
    }
}

/// Least squares of `y` on `[1 | masked features]` over the observed rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveFit {
    pub beta_hat: DVector<f64>,
    pub mask: FeatureMask,
    pub r2: f64,
    pub r2_adj: f64,
    pub train_mse: f64,
}

impl Predictor for NaiveFit {
    fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    fn coefficients(&self) -> &DVector<f64> {
        &self.beta_hat
    }
}

pub fn fit_naive_ols(data: &Dataset, mask: &FeatureMask) -> Result<NaiveFit> {
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
    if m <= j + 1 {
        return Err(Error::InsufficientSamples { m, j });
    }
    let mut design = DMatrix::zeros(m, j + 1);
    design.column_mut(0).fill(1.0);
    for (c, &k) in assigned.iter().enumerate() {
        design.column_mut(c + 1).copy_from(&data.observed_column(k));
    }
    let y = data.y_observed();
    let ls = least_squares(&design, y)?;
    let mut beta_hat = DVector::zeros(data.k() + 1);
    beta_hat[0] = ls.coefficients[0];
    for (c, &k) in assigned.iter().enumerate() {
        beta_hat[k + 1] = ls.coefficients[c + 1];
    }
    let ssr = (y - &design * &ls.coefficients).norm_squared();
    let r2 = coefficient_of_determination(y, ssr);
    Ok(NaiveFit {
        beta_hat,
        mask: mask.clone(),
        r2,
        r2_adj: adjusted_r2(r2, m, j)?,
        train_mse: ssr / m as f64,
    })
}

/// Fully observed test data whose outcomes are only reachable through
/// [`test_mse`], which counts every read.
#[derive(Debug)]
pub struct HoldoutSet {
    data: Dataset,
    reads: AtomicUsize,
}

impl HoldoutSet {
    pub fn new(data: Dataset) -> Result<Self> {
        if !data.is_fully_observed() {
            return Err(Error::InvalidDataset(format!(
                "test data must be fully observed, got m = {} of n = {}",
                data.m(),
                data.n()
            )));
        }
        Ok(HoldoutSet {
            data,
            reads: AtomicUsize::new(0),
        })
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn feature_names(&self) -> &[String] {
        self.data.feature_names()
    }

    /// How many times the outcomes have been read.
    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::SeqCst)
    }
}

impl Clone for HoldoutSet {
    fn clone(&self) -> Self {
        HoldoutSet {
            data: self.data.clone(),
            reads: AtomicUsize::new(0),
        }
    }
}

/// Mean squared prediction error over every test row.
pub fn test_mse(model: &dyn Predictor, test: &HoldoutSet) -> f64 {
    test.reads.fetch_add(1, Ordering::SeqCst);
    let yhat = model.predict(test.data.x_sel());
    mse(test.data.y_observed(), &yhat)
}

/// Outcomes hidden by bias injection or synthesis, in the order of the
/// dataset's unobserved rows. For evaluation only.
pub fn unseal(sealed: &SealedOutcomes) -> &[f64] {
    &sealed.values
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn noiseless_line() {
        let x = DMatrix::from_fn(12, 2, |i, j| if j == 0 { i as f64 * 0.5 - 2.0 } else { ((i * 5) % 7) as f64 });
        let y: Vec<f64> = (0..9).map(|i| 3.0 + x[(i, 0)]).collect();
        let data = Dataset::new(x, y, names(2)).unwrap();
        let fit = fit_naive_ols(&data, &FeatureMask::new(vec![true, false]).unwrap()).unwrap();
        assert!((fit.beta_hat[0] - 3.0).abs() < 1e-8);
        assert!((fit.beta_hat[1] - 1.0).abs() < 1e-8);
        assert_eq!(fit.beta_hat[2], 0.0);
    }

    #[test]
    fn too_few_rows() {
        let x = DMatrix::from_fn(5, 2, |i, j| (i + j * i) as f64);
        let data = Dataset::new(x, vec![1.0, 2.0], names(2)).unwrap();
        let err = fit_naive_ols(&data, &FeatureMask::new(vec![true, false]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { m: 2, j: 1 } | Error::SingularDesign { .. }));
    }

    #[test]
    fn perfect_and_constant_predictors() {
        let x = DMatrix::from_fn(6, 2, |i, j| (i * (j + 1)) as f64);
        let y: Vec<f64> = (0..6).map(|i| 2.0 * i as f64 - 1.0).collect();
        let test = HoldoutSet::new(Dataset::new(x, y.clone(), names(2)).unwrap()).unwrap();
        let mask = FeatureMask::all(2);
        let perfect = NaiveFit {
            beta_hat: DVector::from_vec(vec![-1.0, 2.0, 0.0]),
            mask: mask.clone(),
            r2: 1.0,
            r2_adj: 1.0,
            train_mse: 0.0,
        };
        assert_eq!(test_mse(&perfect, &test), 0.0);
        let mean = y.iter().sum::<f64>() / 6.0;
        let constant = NaiveFit {
            beta_hat: DVector::from_vec(vec![mean, 0.0, 0.0]),
            ..perfect
        };
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 6.0;
        assert!((test_mse(&constant, &test) - var).abs() < 1e-12);
        assert_eq!(test.reads(), 2);
    }

    #[test]
    fn holdout_requires_full_observation() {
        let x = DMatrix::from_fn(4, 2, |i, j| (i + j) as f64);
        assert!(HoldoutSet::new(Dataset::new(x, vec![1.0], names(2)).unwrap()).is_err());
    }
}
