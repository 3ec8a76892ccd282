//! Half-neuron masking and the optional dimension-reduction layer for
//! non-monotone features.

use rand::Rng;

use super::activation::Activation;
use super::network::{InputProjection, Layer, MlpNetwork};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchitectureOptions {
    pub half_masking: bool,
    /// A reduction layer is added when there are more non-monotone
    /// features than this.
    pub reduction_threshold: usize,
    pub reduction_dim: usize,
}

impl Default for ArchitectureOptions {
    fn default() -> Self {
        Self {
            half_masking: true,
            reduction_threshold: 16,
            reduction_dim: 10,
        }
    }
}

/// Restructures a freshly built network.
///
/// With masking, the monotone inputs of every block feed only the first
/// half (rounded up) of its hidden units, and the second half of every
/// intermediate block output ignores that first half. The monotone signal
/// then travels through the first half of every layer and the remaining
/// units form a free channel for the other features.
pub fn apply_appendix_architecture<R: Rng + ?Sized>(
    mut net: MlpNetwork,
    options: &ArchitectureOptions,
    rng: &mut R,
) -> Result<MlpNetwork> {
    let free = net.monotone.complement(net.input_dim);
    if free.len() > options.reduction_threshold && net.projection.is_none() {
        if options.reduction_dim == 0 {
            return Err(Error::Config("reduction_dim must be positive".into()));
        }
        let layer = Layer::random(free.len(), options.reduction_dim, Activation::Identity, rng);
        let proj = InputProjection {
            monotone: net.monotone.indices().to_vec(),
            free,
            layer,
        };
        let first = &net.layers[0];
        net.layers[0] = Layer::random(proj.output_dim(), first.out_dim(), first.activation, rng);
        net.projection = Some(proj);
    }

    if options.half_masking {
        if net.monotone.is_empty() {
            return Err(Error::Config("masking needs at least one monotone feature".into()));
        }
        let blocks = net.num_blocks();
        let mut monotone_inputs = net.block_monotone_inputs();
        for k in 0..blocks {
            let last = k + 1 == blocks;
            let padded = net.layers[2 * k + 1].frozen;
            let first = &mut net.layers[2 * k];
            let h = first.out_dim();
            // A width-1 first layer only occurs in the padded final block,
            // where there is nothing left to separate.
            if h < 2 && !(last && padded) {
                return Err(Error::Structural(format!(
                    "layer {} has width {h}; masking needs at least 2",
                    2 * k
                )));
            }
            let keep = h.div_ceil(2);
            if h >= 2 {
                mask_block(first, keep, &monotone_inputs);
            }
            if !last {
                let second = &mut net.layers[2 * k + 1];
                let o = second.out_dim();
                if o < 2 {
                    return Err(Error::Structural(format!(
                        "layer {} has width {o}; masking needs at least 2",
                        2 * k + 1
                    )));
                }
                let keep_out = o.div_ceil(2);
                let cols: Vec<usize> = (0..keep.min(h)).collect();
                mask_block(second, keep_out, &cols);
                monotone_inputs = (0..keep_out).collect();
            }
        }
        net.half_masking = true;
    }
    net.validate()?;
    Ok(net)
}

/// Zeroes and freezes the weights from `cols` into rows `keep..`.
fn mask_block(layer: &mut Layer, keep: usize, cols: &[usize]) {
    let (rows, width) = (layer.out_dim(), layer.in_dim());
    let mask = layer.mask.get_or_insert_with(|| vec![true; rows * width]);
    for r in keep..rows {
        for &c in cols {
            mask[r * width + c] = false;
        }
    }
    layer.enforce_mask();
}
