//! Derivative envelopes for non-ReLU activations and the matching
//! lower-bound program.
//!
//! The pre-activation range of each unit is cut into intervals. On each
//! interval the derivative is bounded by constants, and one-hot binaries
//! select the interval containing the pre-activation. Refining the
//! partition can only raise the bound.

use monocert_milp::{MilpProblem, Relation, Sense};

use super::encode::{check_target, input_vars, Affine};
use crate::model::{Activation, InputBox, PreactivationBounds, TwoLayerBlock};
use crate::{Error, Result};

/// `lower <= sigma'(t) <= upper` on one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEnvelope {
    pub lower: f64,
    pub upper: f64,
}

/// Relative widening that absorbs rounding in the derivative evaluation.
const WIDEN: f64 = 1e-12;

fn derivative_at(activation: Activation, t: f64) -> f64 {
    if t.is_infinite() {
        match activation {
            Activation::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Smooth(_) => 0.0,
        }
    } else {
        activation.derivative(t)
    }
}

/// Envelopes of `activation'` on `[p_m, p_{m+1}]` for consecutive
/// `points`, which may start at `-inf` and end at `+inf`.
pub fn general_activation_bounds(
    activation: Activation,
    points: &[f64],
) -> Result<Vec<DerivativeEnvelope>> {
    if points.len() < 2 {
        return Err(Error::Config("a partition needs at least two points".into()));
    }
    if points.iter().any(|p| p.is_nan()) || points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("partition points must be non-decreasing".into()));
    }
    Ok(points
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0], w[1]);
            let (dp, dq) = (derivative_at(activation, p), derivative_at(activation, q));
            match activation {
                Activation::Identity => DerivativeEnvelope {
                    lower: 1.0,
                    upper: 1.0,
                },
                // Step function; the kink belongs to the active side.
                Activation::Relu => DerivativeEnvelope {
                    lower: dp,
                    upper: dq,
                },
                Activation::Smooth(s) => {
                    // Unimodal derivative: the infimum sits at an endpoint,
                    // the supremum at the peak when it is inside.
                    let peak = s.derivative_peak();
                    let upper = if p <= peak && peak <= q {
                        s.derivative(peak)
                    } else {
                        dp.max(dq)
                    };
                    DerivativeEnvelope {
                        lower: dp.min(dq) * (1.0 - WIDEN),
                        upper: upper * (1.0 + WIDEN),
                    }
                }
            }
        })
        .collect())
}

/// `m + 1` evenly spaced points from `l` to `u`; the ends are exact.
pub fn uniform_partition(l: f64, u: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|k| {
            if k == 0 {
                l
            } else if k == m {
                u
            } else {
                l + (u - l) * (k as f64 / m as f64)
            }
        })
        .collect()
}

/// Lower-bound program for `d (output j) / d x_l` of a block with any
/// activation, with `intervals` uniform pieces per hidden unit.
pub fn encode_general_activation_min(
    block: &TwoLayerBlock,
    output: usize,
    feature: usize,
    input_box: &InputBox,
    hidden: &PreactivationBounds,
    intervals: usize,
) -> Result<MilpProblem> {
    check_target(block, output, feature)?;
    if intervals == 0 {
        return Err(Error::Config("at least one interval per unit is required".into()));
    }
    if input_box.dim() != block.input_dim() || hidden.len() != block.hidden_dim() {
        return Err(Error::Input("box or bounds do not match the block".into()));
    }
    let act = block.first.activation;
    let coeffs = block.path_coefficients(output, feature);
    let mut p = MilpProblem::new(Sense::Minimize);
    let x = input_vars(&mut p, input_box);
    let xa: Vec<Affine> = x.iter().map(|&v| Affine::var(v)).collect();
    let mut objective = Vec::new();
    let mut constant = 0.0;
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let (l, u) = (hidden.lower[i], hidden.upper[i]);
        if !(l <= u) || !l.is_finite() || !u.is_finite() {
            return Err(Error::Encoding(format!("unit {i}: invalid bounds l={l} u={u}")));
        }
        let points = uniform_partition(l, u, intervals);
        let env = general_activation_bounds(act, &points)?;
        let g = |e: &DerivativeEnvelope| if c >= 0.0 { e.lower } else { e.upper };
        if act == Activation::Identity || l == u {
            constant += c * g(&env[0]);
            continue;
        }
        let pre = Affine::dot(block.first.weights.row(i), &xa, block.first.biases[i]);
        let z: Vec<_> = (0..intervals)
            .map(|m| p.add_binary(format!("z{i}_{m}")))
            .collect();
        p.add_constraint(
            format!("one{i}"),
            z.iter().map(|&v| (v, 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
        // sum_m p_m z_m <= pre <= sum_m p_{m+1} z_m
        let mut lo = pre.terms.clone();
        lo.extend(z.iter().zip(&points).map(|(&v, &pm)| (v, -pm)));
        p.add_constraint(format!("lo{i}"), lo, Relation::Ge, -pre.constant);
        let mut hi = pre.terms.clone();
        hi.extend(z.iter().zip(&points[1..]).map(|(&v, &pm)| (v, -pm)));
        p.add_constraint(format!("hi{i}"), hi, Relation::Le, -pre.constant);
        for (m, e) in env.iter().enumerate() {
            objective.push((z[m], c * g(e)));
        }
    }
    p.set_objective(Sense::Minimize, objective, constant);
    Ok(p)
}
