//! Getting data in and out: files, scaling, outcome hiding, splits, and
//! synthetic generation.

mod bias;
mod split;
mod standardize;
mod synth;
mod table;

pub use bias::{inject_bias, BiasRule, Comparator, SealedOutcomes};
pub use split::{split, SplitSpec};
pub use standardize::{standardize, Standardizer};
pub use synth::{synthesize, synthesize_population, SyntheticSpec, SyntheticTruth};
pub use table::{load_csv, read_csv, write_csv, write_csv_to, Schema};
