//! Training data under outcome selection and the prediction-feature mask.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named non-feature column carried alongside the data (for example a
/// column that a bias rule thresholds on). Never used for fitting.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxColumn {
    pub name: String,
    pub values: Vec<f64>,
}

/// Selection features for `n` samples, of which the first `m` have an
/// observed outcome (`s_i = 1`) and the remaining `n - m` do not.
///
/// Unobserved outcomes are not stored here at all, so nothing downstream of a
/// `Dataset` can read them by accident.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x_sel: DMatrix<f64>,
    y: DVector<f64>,
    feature_names: Vec<String>,
    row_order: Vec<usize>,
    aux: Vec<AuxColumn>,
}

impl Dataset {
    /// Builds a dataset whose first `y_observed.len()` rows carry outcomes.
    pub fn new(x_sel: DMatrix<f64>, y_observed: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        let n = x_sel.nrows();
        let row_order = (0..n).collect();
        Self::with_order(x_sel, DVector::from_vec(y_observed), feature_names, row_order, Vec::new())
    }

    /// Builds a dataset from rows in arbitrary order, moving observed rows to
    /// the front (stable within each group) and recording the permutation.
    pub fn from_rows(
        x: DMatrix<f64>,
        outcomes: &[Option<f64>],
        feature_names: Vec<String>,
        aux: Vec<AuxColumn>,
    ) -> Result<Self> {
        if outcomes.len() != x.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} outcomes for {} rows",
                outcomes.len(),
                x.nrows()
            )));
        }
        let observed = (0..x.nrows()).filter(|&i| outcomes[i].is_some());
        let missing = (0..x.nrows()).filter(|&i| outcomes[i].is_none());
        let order: Vec<usize> = observed.chain(missing).collect();
        let y: Vec<f64> = order.iter().map_while(|&i| outcomes[i]).collect();
        let x_sel = x.select_rows(order.iter());
        let aux = permute_aux(&aux, &order);
        Self::with_order(x_sel, DVector::from_vec(y), feature_names, order, aux)
    }

    pub(crate) fn with_order(
        x_sel: DMatrix<f64>,
        y: DVector<f64>,
        feature_names: Vec<String>,
        row_order: Vec<usize>,
        aux: Vec<AuxColumn>,
    ) -> Result<Self> {
        let (n, k) = x_sel.shape();
        let m = y.len();
        if k < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 selection features, got {k}")));
        }
        if m < 1 || m > n {
            return Err(Error::InvalidDataset(format!(
                "observed count m = {m} must satisfy 1 <= m <= n = {n}"
            )));
        }
        if feature_names.len() != k {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {k} features",
                feature_names.len()
            )));
        }
        if row_order.len() != n {
            return Err(Error::InvalidDataset("row order length mismatch".into()));
        }
        if let Some(pos) = x_sel.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % n, pos / n);
            return Err(Error::InvalidDataset(format!(
                "non-finite feature `{}` at row {row}",
                feature_names[col]
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite outcome at row {i}")));
        }
        if aux.iter().any(|a| a.values.len() != n) {
            return Err(Error::InvalidDataset("auxiliary column length mismatch".into()));
        }
        Ok(Dataset {
            x_sel,
            y,
            feature_names,
            row_order,
            aux,
        })
    }

    pub fn n(&self) -> usize {
        self.x_sel.nrows()
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.x_sel.ncols()
    }

    pub fn x_sel(&self) -> &DMatrix<f64> {
        &self.x_sel
    }

    /// Outcomes of the first `m` rows.
    pub fn y_observed(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn is_fully_observed(&self) -> bool {
        self.m() == self.n()
    }

    /// Selection indicator `s_i`.
    pub fn selected(&self, i: usize) -> bool {
        i < self.m()
    }

    pub fn selection_indicator(&self) -> Vec<bool> {
        (0..self.n()).map(|i| self.selected(i)).collect()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Original (input) row index of each stored row.
    pub fn row_order(&self) -> &[usize] {
        &self.row_order
    }

    pub fn aux(&self) -> &[AuxColumn] {
        &self.aux
    }

    pub fn aux_column(&self, name: &str) -> Option<&AuxColumn> {
        self.aux.iter().find(|a| a.name == name)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub(crate) fn set_features(&mut self, x_sel: DMatrix<f64>) {
        debug_assert_eq!(x_sel.shape(), self.x_sel.shape());
        self.x_sel = x_sel;
    }

    /// Design matrix `[1 | x_sel]` over all `n` rows.
    pub fn selection_design(&self) -> DMatrix<f64> {
        self.x_sel.clone().insert_column(0, 1.0)
    }

    /// Column `k` restricted to observed rows.
    pub fn observed_column(&self, k: usize) -> nalgebra::DVectorView<'_, f64> {
        self.x_sel.generic_view((0, k), (nalgebra::Dyn(self.m()), nalgebra::Const::<1>))
    }

    /// Rows `indices` of a fully observed dataset, in the given order.
    pub(crate) fn subset_fully_observed(&self, indices: &[usize]) -> Result<Self> {
        debug_assert!(self.is_fully_observed());
        let x = self.x_sel.select_rows(indices.iter());
        let y = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.y[i]));
        let order = indices.iter().map(|&i| self.row_order[i]).collect();
        let aux = permute_aux(&self.aux, indices);
        Self::with_order(x, y, self.feature_names.clone(), order, aux)
    }
}

fn permute_aux(aux: &[AuxColumn], order: &[usize]) -> Vec<AuxColumn> {
    aux.iter()
        .map(|a| AuxColumn {
            name: a.name.clone(),
            values: order.iter().map(|&i| a.values[i]).collect(),
        })
        .collect()
}

/// Which selection features are also prediction features (`ψ(k)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask {
    assigned: Vec<bool>,
}

impl FeatureMask {
    /// Rejects the all-zero mask with [`Error::AllZeroMask`].
    pub fn new(assigned: Vec<bool>) -> Result<Self> {
        if assigned.is_empty() {
            return Err(Error::InvalidMask("mask has no features".into()));
        }
        if !assigned.iter().any(|&a| a) {
            return Err(Error::AllZeroMask);
        }
        Ok(FeatureMask { assigned })
    }

    pub fn all(k: usize) -> Self {
        FeatureMask {
            assigned: vec![true; k],
        }
    }

    /// Mask over `k` features with the given (0-based) indices assigned.
    pub fn from_indices(k: usize, indices: &[usize]) -> Result<Self> {
        let mut assigned = vec![false; k];
        for &i in indices {
            if i >= k {
                return Err(Error::InvalidMask(format!("index {i} out of range for {k} features")));
            }
            assigned[i] = true;
        }
        Self::new(assigned)
    }

    pub fn assigned(&self) -> &[bool] {
        &self.assigned
    }

    pub fn is_assigned(&self, k: usize) -> bool {
        self.assigned[k]
    }

    pub fn k(&self) -> usize {
        self.assigned.len()
    }

    /// Number of prediction features `J`.
    pub fn j_count(&self) -> usize {
        self.assigned.iter().filter(|&&a| a).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.k()).filter(|&k| self.assigned[k]).collect()
    }

    /// True when every feature assigned in `other` is also assigned here.
    pub fn is_superset_of(&self, other: &FeatureMask) -> bool {
        self.k() == other.k() && other.indices().iter().all(|&k| self.assigned[k])
    }

    /// Compact `0`/`1` string, feature 1 first.
    pub fn bit_string(&self) -> String {
        self.assigned.iter().map(|&a| if a { '1' } else { '0' }).collect()
    }
}
