use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction {} must lie in (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Seeded shuffle of a fully observed dataset into `round(n·f)` training
/// rows and the rest for testing. Each side keeps ascending row order.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    if !data.is_fully_observed() {
        return Err(Error::InvalidDataset(
            "split must precede bias injection; dataset has hidden outcomes".into(),
        ));
    }
    let n = data.n();
    let n_train = (n as f64 * spec.train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::DegenerateSplit {
            train: n_train,
            test: n - n_train,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(spec.seed, Stream::Split, 0));
    let (train, test) = idx.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset_fully_observed(train)?, data.subset_fully_observed(test)?))
}
