//! Two-layer blocks, interval bounds and the monotone coordinates of each
//! block.

use serde::{Deserialize, Serialize};

use super::domain::InputBox;
use super::network::{Layer, MlpNetwork};
use crate::{Error, Result};

/// Layers `2k-1` and `2k` of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerBlock {
    pub index: usize,
    pub first: Layer,
    pub second: Layer,
}

impl TwoLayerBlock {
    pub fn input_dim(&self) -> usize {
        self.first.in_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.first.out_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.second.out_dim()
    }

    /// Block output, including the second layer's activation.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.second.apply(&self.first.apply(x))
    }

    /// `d (second-layer pre-activation j) / d x_l`.
    pub fn gradient(&self, x: &[f64], output: usize, feature: usize) -> f64 {
        let pre = self.first.preactivation(x);
        let a = self.second.weights.row(output);
        let mut g = 0.0;
        for (i, z) in pre.iter().enumerate() {
            g += a[i] * self.first.activation.derivative(*z) * self.first.weights.get(i, feature);
        }
        g
    }

    /// `a_{j,i} w_{i,l}` for every hidden unit `i`.
    pub fn path_coefficients(&self, output: usize, feature: usize) -> Vec<f64> {
        (0..self.hidden_dim())
            .map(|i| self.second.weights.get(output, i) * self.first.weights.get(i, feature))
            .collect()
    }
}

pub fn decompose_blocks(net: &MlpNetwork) -> Result<Vec<TwoLayerBlock>> {
    if net.layers.len() % 2 == 1 {
        return Err(Error::Structural(format!(
            "odd layer count {} cannot be split into blocks",
            net.layers.len()
        )));
    }
    Ok(net
        .layers
        .chunks(2)
        .enumerate()
        .map(|(index, pair)| TwoLayerBlock {
            index,
            first: pair[0].clone(),
            second: pair[1].clone(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreactivationBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PreactivationBounds {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// Interval image of `layer`'s affine part over `[lo, hi]`.
pub fn interval_affine(layer: &Layer, lo: &[f64], hi: &[f64]) -> PreactivationBounds {
    let n = layer.out_dim();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for r in 0..n {
        let (mut l, mut u) = (layer.biases[r], layer.biases[r]);
        for (c, &w) in layer.weights.row(r).iter().enumerate() {
            if w >= 0.0 {
                u += w * hi[c];
                l += w * lo[c];
            } else {
                u += w * lo[c];
                l += w * hi[c];
            }
        }
        lower.push(l);
        upper.push(u);
    }
    PreactivationBounds { lower, upper }
}

fn activate(layer: &Layer, b: &PreactivationBounds) -> InputBox {
    // Every supported activation is non-decreasing.
    InputBox {
        lower: b.lower.iter().map(|&v| layer.activation.apply(v)).collect(),
        upper: b.upper.iter().map(|&v| layer.activation.apply(v)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockBounds {
    pub input: InputBox,
    pub hidden: PreactivationBounds,
    pub output: PreactivationBounds,
}

/// Bounds for each block of a chain, starting from `input_box`.
pub fn propagate_bounds(blocks: &[TwoLayerBlock], input_box: &InputBox) -> Result<Vec<BlockBounds>> {
    let mut current = input_box.clone();
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks {
        if current.dim() != block.input_dim() {
            return Err(Error::Input(format!(
                "block {} expects {} inputs, box has {}",
                block.index,
                block.input_dim(),
                current.dim()
            )));
        }
        let hidden = interval_affine(&block.first, &current.lower, &current.upper);
        let post = activate(&block.first, &hidden);
        let output = interval_affine(&block.second, &post.lower, &post.upper);
        let next = activate(&block.second, &output);
        out.push(BlockBounds {
            input: std::mem::replace(&mut current, next),
            hidden,
            output,
        });
    }
    Ok(out)
}

/// Box of the first block's input when the network input ranges over
/// `input_box`.
pub fn block_input_box(net: &MlpNetwork, input_box: &InputBox) -> Result<InputBox> {
    if input_box.dim() != net.input_dim {
        return Err(Error::Input(format!(
            "box has dimension {}, network expects {}",
            input_box.dim(),
            net.input_dim
        )));
    }
    Ok(match &net.projection {
        None => input_box.clone(),
        Some(p) => {
            let mut lower: Vec<f64> = p.monotone.iter().map(|&i| input_box.lower[i]).collect();
            let mut upper: Vec<f64> = p.monotone.iter().map(|&i| input_box.upper[i]).collect();
            let lo: Vec<f64> = p.free.iter().map(|&i| input_box.lower[i]).collect();
            let hi: Vec<f64> = p.free.iter().map(|&i| input_box.upper[i]).collect();
            let b = interval_affine(&p.layer, &lo, &hi);
            lower.extend(b.lower);
            upper.extend(b.upper);
            InputBox { lower, upper }
        }
    })
}

/// Which (output, input) pairs of a block must have non-negative
/// derivative for the whole network to be monotone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMonotonicity {
    /// Block inputs that depend on monotone features.
    pub inputs: Vec<usize>,
    /// Outputs that depend on `inputs` and reach the network output.
    pub outputs: Vec<usize>,
}

impl BlockMonotonicity {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.outputs
            .iter()
            .flat_map(move |&j| self.inputs.iter().map(move |&l| (j, l)))
    }
}

/// Monotone coordinates of every block, following non-zero weights forward
/// from the monotone features and backward from the output.
pub fn monotone_structure(net: &MlpNetwork) -> Vec<BlockMonotonicity> {
    let pairs: Vec<(&Layer, &Layer)> = net.layers.chunks(2).map(|c| (&c[0], &c[1])).collect();

    // Backward: block outputs with a non-zero path to the network output.
    let mut relevant_out = vec![Vec::new(); pairs.len()];
    let mut live = vec![true];
    for (k, (first, second)) in pairs.iter().enumerate().rev() {
        relevant_out[k] = live.clone();
        let hidden = reach_back(second, &live);
        live = reach_back(first, &hidden);
    }

    let mut inputs = net.block_monotone_inputs();
    let mut out = Vec::with_capacity(pairs.len());
    for (k, (first, second)) in pairs.iter().enumerate() {
        let mut src = vec![false; first.in_dim()];
        for &m in &inputs {
            src[m] = true;
        }
        let hidden = reach_forward(first, &src);
        let reached = reach_forward(second, &hidden);
        let outputs: Vec<usize> = (0..second.out_dim())
            .filter(|&j| reached[j] && relevant_out[k][j])
            .collect();
        let next: Vec<usize> = (0..second.out_dim()).filter(|&j| reached[j]).collect();
        out.push(BlockMonotonicity {
            inputs: std::mem::replace(&mut inputs, next),
            outputs,
        });
    }
    out
}

fn reach_forward(layer: &Layer, src: &[bool]) -> Vec<bool> {
    (0..layer.out_dim())
        .map(|r| layer.weights.row(r).iter().zip(src).any(|(w, s)| *s && *w != 0.0))
        .collect()
}

fn reach_back(layer: &Layer, dst: &[bool]) -> Vec<bool> {
    let mut src = vec![false; layer.in_dim()];
    for (r, live) in dst.iter().enumerate() {
        if *live {
            for (c, w) in layer.weights.row(r).iter().enumerate() {
                if *w != 0.0 {
                    src[c] = true;
                }
            }
        }
    }
    src
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Activation, MonotoneSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_first_block_bounds() {
        let first = Layer::from_rows(&[vec![1.0, -2.0]], vec![0.5], Activation::Relu).unwrap();
        let second = Layer::from_rows(&[vec![1.0]], vec![0.0], Activation::Identity).unwrap();
        let block = TwoLayerBlock {
            index: 0,
            first,
            second,
        };
        let b = propagate_bounds(&[block], &InputBox::unit(2)).unwrap();
        assert_eq!(b[0].hidden.upper, vec![1.5]);
        assert_eq!(b[0].hidden.lower, vec![-1.5]);
        assert_eq!(b[0].output.upper, vec![1.5]);
        assert_eq!(b[0].output.lower, vec![0.0]);
    }

    #[test]
    fn constant_layer_bounds_are_tight() {
        let l = Layer::from_rows(&[vec![0.0, 0.0]], vec![3.0], Activation::Relu).unwrap();
        let b = interval_affine(&l, &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!((b.lower[0], b.upper[0]), (3.0, 3.0));
    }

    #[test]
    fn blocks_compose_to_forward_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = MonotoneSpec::increasing(vec![0, 2]).unwrap();
        let net = MlpNetwork::random(3, &[5, 4, 6], spec, &mut rng).unwrap();
        let blocks = decompose_blocks(&net).unwrap();
        assert_eq!(blocks.len(), 2);
        let unit = InputBox::unit(3);
        for _ in 0..100 {
            let x = unit.sample(&mut rng);
            let mut h = x.clone();
            for b in &blocks {
                h = b.forward(&h);
            }
            assert_eq!(h[0].to_bits(), net.forward(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn structure_follows_nonzero_weights() {
        // Input 0 is monotone and feeds hidden unit 0 only; hidden unit 1
        // feeds output 1, which does not reach the network output.
        let l1 = Layer::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Activation::Relu,
        )
        .unwrap();
        let l2 = Layer::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Activation::Relu,
        )
        .unwrap();
        let l3 = Layer::from_rows(
            &[vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![0.0, 0.0],
            Activation::Relu,
        )
        .unwrap();
        let l4 = Layer::from_rows(&[vec![1.0, 0.0]], vec![0.0], Activation::Identity).unwrap();
        let net = MlpNetwork::new(
            2,
            MonotoneSpec::increasing(vec![0]).unwrap(),
            vec![l1, l2, l3, l4],
        )
        .unwrap();
        let s = monotone_structure(&net);
        assert_eq!(s[0].inputs, vec![0]);
        assert_eq!(s[0].outputs, vec![0]);
        assert_eq!(s[1].inputs, vec![0]);
        assert_eq!(s[1].outputs, vec![0]);
    }

    #[test]
    fn block_gradient_matches_network_gradient_for_one_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net =
            MlpNetwork::random(2, &[6], MonotoneSpec::increasing(vec![1]).unwrap(), &mut rng)
                .unwrap();
        let block = &decompose_blocks(&net).unwrap()[0];
        for _ in 0..20 {
            let x = InputBox::unit(2).sample(&mut rng);
            let g = net.grad_input(&x).unwrap();
            assert!((block.gradient(&x, 0, 1) - g[1]).abs() < 1e-12);
        }
    }
}
