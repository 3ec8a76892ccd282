//! Sampled monotonicity penalty and its closed-form weight gradients.
//!
//! For a ReLU block the partial derivative
//! `g = sum_i A[j,i] s_i W[i,l]` is bilinear in the two weight matrices once
//! the activation bits `s_i` are fixed by the sample, so the gradient of the
//! penalty needs no second-order machinery. Biases only move the bits and
//! get zero gradient.

use rand::Rng;

use super::config::PenaltyForm;
use crate::model::{
    block_input_box, decompose_blocks, monotone_structure, propagate_bounds, InputBox, Matrix,
    MlpNetwork, TwoLayerBlock,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub margin: f64,
    pub form: PenaltyForm,
}

impl Penalty {
    pub fn margin(margin: f64) -> Self {
        Self {
            margin,
            form: PenaltyForm::Margin,
        }
    }

    /// Residual `r(g)` and `dr/dg`; the per-term penalty is `r^2`.
    fn residual(&self, g: f64) -> (f64, f64) {
        match self.form {
            PenaltyForm::Margin if g < self.margin => (self.margin - g, -1.0),
            PenaltyForm::Margin => (0.0, 0.0),
            PenaltyForm::Literal if -g > self.margin => (-g, -1.0),
            PenaltyForm::Literal => (self.margin, 0.0),
        }
    }
}

/// Gradient of a block penalty with respect to its two weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGradient {
    pub first: Matrix,
    pub second: Matrix,
}

impl BlockGradient {
    fn zeros(block: &TwoLayerBlock) -> Self {
        Self {
            first: Matrix::zeros(block.hidden_dim(), block.input_dim()),
            second: Matrix::zeros(block.output_dim(), block.hidden_dim()),
        }
    }
}

/// `(1/|S|) sum_x sum_(j,l) r(d out_j / d x_l)^2` over the samples `S` and
/// the (output, input) `pairs`, with its weight gradient.
pub fn penalty_value_and_grad(
    block: &TwoLayerBlock,
    pairs: &[(usize, usize)],
    samples: &[Vec<f64>],
    penalty: Penalty,
) -> Result<(f64, BlockGradient)> {
    if samples.is_empty() {
        return Err(Error::Input("penalty needs at least one sample".into()));
    }
    if !block.first.activation.is_piecewise_linear() {
        return Err(Error::Config(format!(
            "penalty gradients need a piecewise-linear activation, got {}",
            block.first.activation
        )));
    }
    if let Some(&(j, l)) = pairs
        .iter()
        .find(|&&(j, l)| j >= block.output_dim() || l >= block.input_dim())
    {
        return Err(Error::Input(format!("pair ({j}, {l}) out of range for the block")));
    }
    let h = block.hidden_dim();
    let (w, a) = (&block.first.weights, &block.second.weights);
    let scale = 1.0 / samples.len() as f64;
    let mut grad = BlockGradient::zeros(block);
    let mut value = 0.0;
    let mut bits = vec![0.0; h];
    for x in samples {
        if x.len() != block.input_dim() {
            return Err(Error::Input(format!(
                "sample has {} coordinates, block expects {}",
                x.len(),
                block.input_dim()
            )));
        }
        for (s, z) in bits.iter_mut().zip(block.first.preactivation(x)) {
            *s = block.first.activation.derivative(z);
        }
        for &(j, l) in pairs {
            let arow = a.row(j);
            let g: f64 = (0..h).map(|i| arow[i] * bits[i] * w.get(i, l)).sum();
            let (r, dr) = penalty.residual(g);
            value += r * r;
            if dr == 0.0 {
                continue;
            }
            let c = 2.0 * r * dr * scale;
            for i in 0..h {
                if bits[i] == 0.0 {
                    continue;
                }
                let ga = grad.second.get(j, i) + c * bits[i] * w.get(i, l);
                grad.second.set(j, i, ga);
                let gw = grad.first.get(i, l) + c * arow[i] * bits[i];
                grad.first.set(i, l, gw);
            }
        }
    }
    Ok((value * scale, grad))
}

/// Sum of block penalties on explicit per-block sample sets.
pub fn layerwise_penalty_on(
    net: &MlpNetwork,
    samples: &[Vec<Vec<f64>>],
    penalty: Penalty,
) -> Result<(f64, Vec<BlockGradient>)> {
    let blocks = decompose_blocks(net)?;
    if samples.len() != blocks.len() {
        return Err(Error::Input(format!(
            "{} sample sets for {} blocks",
            samples.len(),
            blocks.len()
        )));
    }
    let structure = monotone_structure(net);
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(blocks.len());
    for ((block, s), set) in blocks.iter().zip(&structure).zip(samples) {
        let pairs: Vec<_> = s.pairs().collect();
        if pairs.is_empty() {
            grads.push(BlockGradient::zeros(block));
            continue;
        }
        let (v, g) = penalty_value_and_grad(block, &pairs, set, penalty)?;
        total += v;
        grads.push(g);
    }
    Ok((total, grads))
}

/// Draws `per_block` samples uniformly from each block's propagated input
/// box over `input_box`.
pub fn sample_block_inputs<R: Rng + ?Sized>(
    net: &MlpNetwork,
    input_box: &InputBox,
    per_block: usize,
    rng: &mut R,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let blocks = decompose_blocks(net)?;
    let bounds = propagate_bounds(&blocks, &block_input_box(net, input_box)?)?;
    Ok(bounds
        .iter()
        .map(|b| (0..per_block).map(|_| b.input.sample(rng)).collect())
        .collect())
}

/// Layer-wise penalty on fresh samples from each block's input box over
/// the unit cube.
pub fn layerwise_penalty<R: Rng + ?Sized>(
    net: &MlpNetwork,
    samples_per_block: usize,
    penalty: Penalty,
    rng: &mut R,
) -> Result<(f64, Vec<BlockGradient>)> {
    let samples = sample_block_inputs(net, &InputBox::unit(net.input_dim), samples_per_block, rng)?;
    layerwise_penalty_on(net, &samples, penalty)
}
