//! Network representation: evaluation, gradients, block decomposition,
//! interval bounds, masking and serialization.

mod activation;
mod architecture;
mod blocks;
mod domain;
pub mod io;
mod matrix;
mod network;
mod paths;

pub use activation::{Activation, Smooth};
pub use architecture::{apply_appendix_architecture, ArchitectureOptions};
pub use blocks::{
    block_input_box, decompose_blocks, interval_affine, monotone_structure, propagate_bounds,
    BlockBounds, BlockMonotonicity, PreactivationBounds, TwoLayerBlock,
};
pub use domain::{Direction, InputBox, MonotoneSpec};
pub use io::{load, save};
pub use matrix::Matrix;
pub use network::{InputProjection, Layer, MlpNetwork};
pub(crate) use activation::sigmoid;
pub use paths::{count_negative_paths, PathCounts};
