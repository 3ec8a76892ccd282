//! Whole-network encodings: the output of a deep ReLU network for attack
//! search, and the path-product encoding of its input derivative.

use std::collections::BTreeMap;

use monocert_milp::{MilpProblem, Relation, Sense, VarId};

use super::encode::{indicator_on, relu_on, Affine};
use crate::model::{block_input_box, interval_affine, Activation, InputBox, MlpNetwork, PreactivationBounds};
use crate::{Error, Result};

/// Default cap on the number of paths of the naive encoding.
pub const DEFAULT_PATH_CAP: usize = 4096;

/// Pre-activation bounds of every layer for inputs in `input_box`.
pub fn layer_bounds(net: &MlpNetwork, input_box: &InputBox) -> Result<Vec<PreactivationBounds>> {
    let start = block_input_box(net, input_box)?;
    let (mut lo, mut hi) = (start.lower, start.upper);
    let mut out = Vec::with_capacity(net.layers.len());
    for layer in &net.layers {
        let b = interval_affine(layer, &lo, &hi);
        lo = b.lower.iter().map(|&v| layer.activation.apply(v)).collect();
        hi = b.upper.iter().map(|&v| layer.activation.apply(v)).collect();
        out.push(b);
    }
    Ok(out)
}

/// Adds the network's forward pass on top of `inputs` (expressions for the
/// first block's input) and returns the output expression.
pub(crate) fn encode_forward(
    p: &mut MilpProblem,
    net: &MlpNetwork,
    inputs: Vec<Affine>,
    bounds: &[PreactivationBounds],
) -> Result<Affine> {
    let mut h = inputs;
    for (k, layer) in net.layers.iter().enumerate() {
        let mut next = Vec::with_capacity(layer.out_dim());
        for i in 0..layer.out_dim() {
            let pre = Affine::dot(layer.weights.row(i), &h, layer.biases[i]);
            let (l, u) = (bounds[k].lower[i], bounds[k].upper[i]);
            next.push(match layer.activation {
                Activation::Identity => pre,
                Activation::Relu if u <= 0.0 => Affine::constant(0.0),
                Activation::Relu if l >= 0.0 => pre,
                Activation::Relu => Affine::var(relu_on(p, &pre, u, l, &format!("{k}_{i}"))?.0),
                Activation::Smooth(_) => {
                    return Err(Error::Encoding(
                        "only ReLU and identity layers have an exact encoding".into(),
                    ))
                }
            });
        }
        h = next;
    }
    Ok(h.swap_remove(0))
}

/// Position of network input `feature` in the first block's input.
pub(crate) fn block_position(net: &MlpNetwork, feature: usize) -> Result<usize> {
    if feature >= net.input_dim {
        return Err(Error::Input(format!(
            "feature {feature} out of range for input dimension {}",
            net.input_dim
        )));
    }
    match &net.projection {
        None => Ok(feature),
        Some(proj) => proj.monotone.iter().position(|&i| i == feature).ok_or_else(|| {
            Error::Input(format!("feature {feature} is not monotone and is projected"))
        }),
    }
}

/// Path-product encoding of `min d f / d x_l` over the whole network.
///
/// Each input-to-output path contributes the product of its weights times
/// the product of the activation bits of the ReLU units along it. Paths
/// with the same ReLU units share one binary `p`, linked by `p <= z_k` and
/// `p >= sum_k z_k - (K - 1)`. The derivative is taken of the last layer's
/// pre-activation.
pub fn encode_deep_naive(
    net: &MlpNetwork,
    feature: usize,
    input_box: &InputBox,
    path_cap: usize,
) -> Result<MilpProblem> {
    net.validate()?;
    let pos = block_position(net, feature)?;
    let hidden = &net.layers[..net.layers.len() - 1];
    let paths: u128 = hidden
        .iter()
        .fold(1u128, |acc, l| acc.saturating_mul(l.out_dim() as u128));
    if paths > path_cap as u128 {
        return Err(Error::PathCap {
            paths,
            cap: path_cap,
        });
    }
    if hidden.iter().any(|l| !l.activation.is_piecewise_linear()) {
        return Err(Error::Encoding("naive encoding needs ReLU or identity layers".into()));
    }
    let relu_layers: Vec<usize> = (0..hidden.len())
        .filter(|&k| hidden[k].activation == Activation::Relu)
        .collect();

    // Path coefficients keyed by the ReLU units on the path.
    let mut coeffs: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let output = &net.layers[net.layers.len() - 1];
    let mut stack: Vec<(usize, usize, f64, Vec<usize>)> = (0..output.in_dim())
        .map(|i| (hidden.len() - 1, i, output.weights.get(0, i), Vec::new()))
        .collect();
    while let Some((k, i, c, mut key)) = stack.pop() {
        if c == 0.0 {
            continue;
        }
        if hidden[k].activation == Activation::Relu {
            key.push(i);
        }
        let layer = &hidden[k];
        if k == 0 {
            let c = c * layer.weights.get(i, pos);
            if c != 0.0 {
                key.reverse();
                *coeffs.entry(key).or_insert(0.0) += c;
            }
            continue;
        }
        for prev in 0..layer.in_dim() {
            stack.push((k - 1, prev, c * layer.weights.get(i, prev), key.clone()));
        }
    }

    let bounds = layer_bounds(net, input_box)?;
    let block_box = block_input_box(net, input_box)?;
    let mut p = MilpProblem::new(Sense::Minimize);
    let mut h: Vec<Affine> = (0..block_box.dim())
        .map(|c| Affine::var(p.add_continuous(format!("x{c}"), block_box.lower[c], block_box.upper[c])))
        .collect();

    // Activation bits of the units that occur on some path.
    let last_relu = relu_layers.last().copied();
    let mut z: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    let needed = |k: usize, i: usize| {
        let r = relu_layers.iter().position(|&q| q == k).expect("relu layer");
        coeffs.keys().any(|key| key[r] == i)
    };
    for (k, layer) in hidden.iter().enumerate() {
        if Some(k) > last_relu {
            break;
        }
        let mut next = Vec::with_capacity(layer.out_dim());
        for i in 0..layer.out_dim() {
            let pre = Affine::dot(layer.weights.row(i), &h, layer.biases[i]);
            let (l, u) = (bounds[k].lower[i], bounds[k].upper[i]);
            if layer.activation == Activation::Identity {
                next.push(pre);
            } else if Some(k) == last_relu {
                if needed(k, i) {
                    z.insert((k, i), indicator_on(&mut p, &pre, u, l, &i.to_string())?);
                }
            } else {
                let (y, zi) = relu_on(&mut p, &pre, u, l, &format!("{k}_{i}"))?;
                z.insert((k, i), zi);
                next.push(Affine::var(y));
            }
        }
        h = next;
    }

    let mut objective = Vec::new();
    let mut constant = 0.0;
    for (key, c) in &coeffs {
        let bits: Vec<VarId> = key
            .iter()
            .zip(&relu_layers)
            .map(|(&i, &k)| z[&(k, i)])
            .collect();
        match bits.len() {
            0 => constant += c,
            1 => objective.push((bits[0], *c)),
            n => {
                let name = key.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_");
                let pb = p.add_binary(format!("p{name}"));
                for (t, &b) in bits.iter().enumerate() {
                    p.add_constraint(format!("pz{name}_{t}"), vec![(pb, 1.0), (b, -1.0)], Relation::Le, 0.0);
                }
                let mut all: Vec<(VarId, f64)> = vec![(pb, 1.0)];
                all.extend(bits.iter().map(|&b| (b, -1.0)));
                p.add_constraint(format!("pall{name}"), all, Relation::Ge, -((n - 1) as f64));
                objective.push((pb, *c));
            }
        }
    }
    p.set_objective(Sense::Minimize, objective, constant);
    Ok(p)
}
