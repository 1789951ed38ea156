//! Outcome hiding by a threshold rule on one column.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    GreaterEq,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Less => value < threshold,
            Comparator::LessEq => value <= threshold,
            Comparator::Greater => value > threshold,
            Comparator::GreaterEq => value >= threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparator::Less => "<",
            Comparator::LessEq => "<=",
            Comparator::Greater => ">",
            Comparator::GreaterEq => ">=",
        }
    }
}

/// Rows satisfying `column comparator threshold` keep their outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasRule {
    pub column: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl fmt::Display for BiasRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.column, self.comparator.symbol(), self.threshold)
    }
}

impl FromStr for BiasRule {
    type Err = Error;

    /// Parses `column OP threshold` with OP one of `<`, `<=`, `≤`, `>`, `>=`, `≥`.
    fn from_str(s: &str) -> Result<Self> {
        const OPS: [(&str, Comparator); 6] = [
            ("<=", Comparator::LessEq),
            (">=", Comparator::GreaterEq),
            ("≤", Comparator::LessEq),
            ("≥", Comparator::GreaterEq),
            ("<", Comparator::Less),
            (">", Comparator::Greater),
        ];
        let bad = || Error::InvalidConfig(format!("cannot parse bias rule `{s}`; expected `column < threshold`"));
        let (pos, op, comparator) = OPS
            .iter()
            .filter_map(|&(op, c)| s.find(op).map(|p| (p, op, c)))
            .min_by_key(|&(p, op, _)| (p, std::cmp::Reverse(op.len())))
            .ok_or_else(bad)?;
        let column = s[..pos].trim();
        let threshold: f64 = s[pos + op.len()..].trim().parse().map_err(|_| bad())?;
        if column.is_empty() || !threshold.is_finite() {
            return Err(bad());
        }
        Ok(BiasRule {
            column: column.to_string(),
            comparator,
            threshold,
        })
    }
}

/// Outcomes hidden by [`inject_bias`], aligned with the unobserved rows
/// `m..n` of the returned dataset. Evaluation-only: read them through
/// [`crate::eval::unseal`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SealedOutcomes {
    pub(crate) values: Vec<f64>,
}

impl SealedOutcomes {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Hides the outcomes of rows that fail `rule` on a fully observed dataset.
///
/// The rule column may be a feature or an auxiliary column. Feature values
/// are only permuted, never changed.
pub fn inject_bias(data: &Dataset, rule: &BiasRule) -> Result<(Dataset, SealedOutcomes)> {
    if !data.is_fully_observed() {
        return Err(Error::InvalidDataset(format!(
            "bias injection needs every outcome observed, got m = {} of n = {}",
            data.m(),
            data.n()
        )));
    }
    let column: Vec<f64> = if let Some(k) = data.feature_index(&rule.column) {
        data.x_sel().column(k).iter().copied().collect()
    } else if let Some(a) = data.aux_column(&rule.column) {
        a.values.clone()
    } else {
        return Err(Error::Schema(format!("bias rule column `{}` not found", rule.column)));
    };

    let keep: Vec<bool> = column.iter().map(|&v| rule.comparator.holds(v, rule.threshold)).collect();
    let kept = keep.iter().filter(|&&b| b).count();
    if kept == 0 {
        return Err(Error::EmptySelection(rule.to_string()));
    }
    if kept == data.n() {
        warn!("bias rule `{rule}` hides no outcomes; data unchanged");
        return Ok((data.clone(), SealedOutcomes::default()));
    }

    let order: Vec<usize> = (0..data.n())
        .filter(|&i| keep[i])
        .chain((0..data.n()).filter(|&i| !keep[i]))
        .collect();
    let y_all = data.y_observed();
    let y = DVector::from_iterator(kept, order[..kept].iter().map(|&i| y_all[i]));
    let sealed = SealedOutcomes {
        values: order[kept..].iter().map(|&i| y_all[i]).collect(),
    };
    let x = data.x_sel().select_rows(order.iter());
    let row_order = order.iter().map(|&i| data.row_order()[i]).collect();
    let aux = data
        .aux()
        .iter()
        .map(|a| crate::dataset::AuxColumn {
            name: a.name.clone(),
            values: order.iter().map(|&i| a.values[i]).collect(),
        })
        .collect();
    let biased = Dataset::with_order(x, y, data.feature_names().to_vec(), row_order, aux)?;
    Ok((biased, sealed))
}
