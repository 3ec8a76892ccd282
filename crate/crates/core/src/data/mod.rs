//! Datasets: CSV ingestion, normalization to the unit cube, splits and the
//! synthetic benchmark family.

mod dataset;
mod loader;
mod split;
mod synth;

pub use dataset::{Dataset, Normalization, Task};
pub use loader::{load_csv, parse_csv, percentile, Schema};
pub use split::{split, split_indices, split_normalized};
pub use synth::{synth_2d, Synth2d, DEFAULT_FREQUENCY, GRID};
