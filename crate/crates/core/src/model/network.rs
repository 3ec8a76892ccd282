use rand::Rng;

use super::activation::Activation;
use super::domain::MonotoneSpec;
use super::matrix::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: Activation,
    /// Excluded from training entirely.
    pub frozen: bool,
    /// Per-weight trainability; `false` entries are pinned to zero.
    pub mask: Option<Vec<bool>>,
}

impl Layer {
    pub fn new(weights: Matrix, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        let layer = Self {
            weights,
            biases,
            activation,
            frozen: false,
            mask: None,
        };
        layer.validate()?;
        Ok(layer)
    }

    pub fn from_rows(rows: &[Vec<f64>], biases: Vec<f64>, activation: Activation) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, biases, activation)
    }

    /// Frozen `1x1` identity, used to pad odd-depth networks.
    pub fn frozen_identity() -> Self {
        Self {
            weights: Matrix::from_vec(1, 1, vec![1.0]).expect("1x1"),
            biases: vec![0.0],
            activation: Activation::Identity,
            frozen: true,
            mask: None,
        }
    }

    /// Uniform initialization in `±1/sqrt(fan_in)` for weights and biases.
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        let data = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let biases = (0..out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        Self {
            weights: Matrix::from_vec(out_dim, in_dim, data).expect("sized"),
            biases,
            activation,
            frozen: false,
            mask: None,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn preactivation(&self, x: &[f64]) -> Vec<f64> {
        self.weights.affine(x, &self.biases)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut h = self.preactivation(x);
        for v in &mut h {
            *v = self.activation.apply(*v);
        }
        h
    }

    pub fn is_trainable(&self, k: usize) -> bool {
        !self.frozen && self.mask.as_ref().is_none_or(|m| m[k])
    }

    /// Re-zeroes masked weights.
    pub fn enforce_mask(&mut self) {
        if let Some(mask) = &self.mask {
            for (w, keep) in self.weights.data_mut().iter_mut().zip(mask) {
                if !keep {
                    *w = 0.0;
                }
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.biases.len() != self.out_dim() {
            return Err(Error::Structural(format!(
                "layer has {} rows but {} biases",
                self.out_dim(),
                self.biases.len()
            )));
        }
        if self.out_dim() == 0 || self.in_dim() == 0 {
            return Err(Error::Structural("layer with an empty dimension".into()));
        }
        if !self.weights.data().iter().chain(&self.biases).all(|v| v.is_finite()) {
            return Err(Error::Structural("non-finite layer parameter".into()));
        }
        if let Some(mask) = &self.mask {
            if mask.len() != self.weights.data().len() {
                return Err(Error::Structural("mask size differs from weight count".into()));
            }
            if mask.iter().zip(self.weights.data()).any(|(k, w)| !k && *w != 0.0) {
                return Err(Error::Structural("masked weight is not zero".into()));
            }
        }
        Ok(())
    }
}

/// Linear map of the non-monotone inputs to a lower dimension. The first
/// block then sees `[x_monotone, P x_free + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputProjection {
    pub monotone: Vec<usize>,
    pub free: Vec<usize>,
    pub layer: Layer,
}

impl InputProjection {
    pub fn output_dim(&self) -> usize {
        self.monotone.len() + self.layer.out_dim()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.monotone.iter().map(|&i| x[i]).collect();
        let free: Vec<f64> = self.free.iter().map(|&i| x[i]).collect();
        out.extend(self.layer.preactivation(&free));
        out
    }
}

/// Fully connected network `R^d -> R`. The layer count is always even so
/// that the network splits into two-layer blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    pub input_dim: usize,
    pub monotone: MonotoneSpec,
    pub projection: Option<InputProjection>,
    pub layers: Vec<Layer>,
    pub half_masking: bool,
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    /// Input of every layer; `inputs[0]` is the projected network input.
    pub inputs: Vec<Vec<f64>>,
    pub pre: Vec<Vec<f64>>,
    pub output: f64,
}

impl MlpNetwork {
    /// Builds a network, appending a frozen identity layer when `layers` has
    /// odd length.
    pub fn new(input_dim: usize, monotone: MonotoneSpec, mut layers: Vec<Layer>) -> Result<Self> {
        if layers.len() % 2 == 1 {
            layers.push(Layer::frozen_identity());
        }
        let net = Self {
            input_dim,
            monotone,
            projection: None,
            layers,
            half_masking: false,
        };
        net.validate()?;
        Ok(net)
    }

    /// ReLU hidden layers of the given widths and an identity output layer.
    pub fn random<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: &[usize],
        monotone: MonotoneSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input_dim;
        for &h in hidden {
            layers.push(Layer::random(prev, h, Activation::Relu, rng));
            prev = h;
        }
        layers.push(Layer::random(prev, 1, Activation::Identity, rng));
        Self::new(input_dim, monotone, layers)
    }

    pub fn num_blocks(&self) -> usize {
        self.layers.len() / 2
    }

    /// Input dimension of the first block.
    pub fn block_input_dim(&self) -> usize {
        self.projection
            .as_ref()
            .map_or(self.input_dim, InputProjection::output_dim)
    }

    /// Coordinates of the first block's input that carry monotone features.
    pub fn block_monotone_inputs(&self) -> Vec<usize> {
        match &self.projection {
            Some(p) => (0..p.monotone.len()).collect(),
            None => self.monotone.indices().to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Structural("input dimension must be positive".into()));
        }
        self.monotone.check_dim(self.input_dim)?;
        if self.layers.is_empty() || self.layers.len() % 2 == 1 {
            return Err(Error::Structural(format!(
                "layer count must be even and positive, got {}",
                self.layers.len()
            )));
        }
        if let Some(p) = &self.projection {
            p.layer.validate()?;
            if p.monotone != self.monotone.indices() {
                return Err(Error::Structural("projection disagrees with monotone set".into()));
            }
            if p.free != self.monotone.complement(self.input_dim) || p.layer.in_dim() != p.free.len()
            {
                return Err(Error::Structural("projection input mismatch".into()));
            }
        }
        let mut dim = self.block_input_dim();
        for (k, layer) in self.layers.iter().enumerate() {
            layer.validate().map_err(|e| Error::Structural(format!("layer {k}: {e}")))?;
            if layer.in_dim() != dim {
                return Err(Error::Structural(format!(
                    "layer {k} expects {} inputs but receives {dim}",
                    layer.in_dim()
                )));
            }
            dim = layer.out_dim();
        }
        if dim != 1 {
            return Err(Error::Structural(format!("network output has dimension {dim}, expected 1")));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Input(format!(
                "expected {} features, got {}",
                self.input_dim,
                x.len()
            )));
        }
        Ok(())
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.projection {
            Some(p) => p.apply(x),
            None => x.to_vec(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut h = self.project(x);
        for layer in &self.layers {
            h = layer.apply(&h);
        }
        Ok(h[0])
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = self.project(x);
        for layer in &self.layers {
            let z = layer.preactivation(&h);
            let next = z.iter().map(|&v| layer.activation.apply(v)).collect();
            inputs.push(std::mem::replace(&mut h, next));
            pre.push(z);
        }
        Trace {
            inputs,
            pre,
            output: h[0],
        }
    }

    /// Gradient of the output with respect to the first block's input,
    /// given the pre-activations of a trace.
    pub(crate) fn backprop_to_block_input(&self, trace: &Trace) -> Vec<f64> {
        let mut g = vec![1.0];
        for (layer, z) in self.layers.iter().zip(&trace.pre).rev() {
            for (gi, zi) in g.iter_mut().zip(z) {
                *gi *= layer.activation.derivative(*zi);
            }
            g = layer.weights.transpose_mul(&g);
        }
        g
    }

    /// `d f / d x` by the chain rule, with `relu'(0) = 1`.
    pub fn grad_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let trace = self.trace(x);
        let g = self.backprop_to_block_input(&trace);
        Ok(match &self.projection {
            None => g,
            Some(p) => {
                let mut out = vec![0.0; self.input_dim];
                for (pos, &i) in p.monotone.iter().enumerate() {
                    out[i] = g[pos];
                }
                let reduced = p.layer.weights.transpose_mul(&g[p.monotone.len()..]);
                for (pos, &i) in p.free.iter().enumerate() {
                    out[i] = reduced[pos];
                }
                out
            }
        })
    }

    /// Re-zeroes every masked weight.
    pub fn enforce_masks(&mut self) {
        for layer in &mut self.layers {
            layer.enforce_mask();
        }
    }

    pub fn parameter_count(&self) -> usize {
        let proj = self
            .projection
            .as_ref()
            .map_or(0, |p| p.layer.weights.data().len() + p.layer.biases.len());
        proj + self
            .layers
            .iter()
            .map(|l| l.weights.data().len() + l.biases.len())
            .sum::<usize>()
    }
}
