//! Feature centering and scaling.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Per-feature location and scale, fitted on one dataset and reusable on
/// others with the same features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_names: Vec<String>,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Mean and population (`1/n`) standard deviation over all `n` rows.
    pub fn fit(data: &Dataset) -> Result<Self> {
        let n = data.n() as f64;
        let mut location = Vec::with_capacity(data.k());
        let mut scale = Vec::with_capacity(data.k());
        for (k, col) in data.x_sel().column_iter().enumerate() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if !(sd > 1e-12 * (1.0 + mean.abs())) {
                return Err(Error::ZeroVariance(data.feature_names()[k].clone()));
            }
            location.push(mean);
            scale.push(sd);
        }
        Ok(Standardizer {
            feature_names: data.feature_names().to_vec(),
            location,
            scale,
        })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        self.check(data)?;
        let mut x = data.x_sel().clone();
        for (k, mut col) in x.column_iter_mut().enumerate() {
            let (loc, sc) = (self.location[k], self.scale[k]);
            col.apply(|v| *v = (*v - loc) / sc);
        }
        let mut out = data.clone();
        out.set_features(x);
        Ok(out)
    }

    pub fn inverse(&self, data: &Dataset) -> Result<Dataset> {
        self.check(data)?;
        let mut x = data.x_sel().clone();
        for (k, mut col) in x.column_iter_mut().enumerate() {
            let (loc, sc) = (self.location[k], self.scale[k]);
            col.apply(|v| *v = *v * sc + loc);
        }
        let mut out = data.clone();
        out.set_features(x);
        Ok(out)
    }

    fn check(&self, data: &Dataset) -> Result<()> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(Error::InvalidDataset(format!(
                "standardizer was fitted on features {:?}, data has {:?}",
                self.feature_names,
                data.feature_names()
            )));
        }
        Ok(())
    }
}

/// Centers and scales every feature to zero mean and unit population
/// variance; the outcome is untouched.
pub fn standardize(data: &Dataset) -> Result<(Dataset, Standardizer)> {
    let st = Standardizer::fit(data)?;
    Ok((st.apply(data)?, st))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn two_point_feature() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 5.0, 2.0, 9.0]);
        let d = Dataset::new(x, vec![1.0, 2.0], names()).unwrap();
        let (s, st) = standardize(&d).unwrap();
        assert_eq!(st.location, vec![1.0, 7.0]);
        assert_eq!(st.scale, vec![1.0, 2.0]);
        assert_eq!(s.x_sel().column(0).as_slice(), &[-1.0, 1.0]);
        assert_eq!(s.x_sel().column(1).as_slice(), &[-1.0, 1.0]);
        assert_eq!(s.y_observed(), d.y_observed());
    }

    #[test]
    fn constant_feature_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[0.1, 1.0, 0.1, 2.0, 0.1, 3.0]);
        let d = Dataset::new(x, vec![1.0], names()).unwrap();
        assert!(matches!(standardize(&d), Err(Error::ZeroVariance(f)) if f == "a"));
    }

    proptest! {
        #[test]
        fn standardizing_twice_is_identity(vals in prop::collection::vec(-50.0f64..50.0, 20)) {
            let x = DMatrix::from_fn(10, 2, |i, j| vals[i * 2 + j] + i as f64 * 0.01);
            let d = Dataset::new(x, vec![0.0; 4], names()).unwrap();
            let (once, st) = standardize(&d).unwrap();
            let (twice, _) = standardize(&once).unwrap();
            prop_assert!((once.x_sel() - twice.x_sel()).amax() < 1e-12);
            let back = st.inverse(&once).unwrap();
            prop_assert!((back.x_sel() - d.x_sel()).amax() < 1e-9);
        }
    }
}
