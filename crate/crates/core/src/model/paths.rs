//! Sign verification: counting input-to-output weight paths by the sign of
//! their product.

use super::network::MlpNetwork;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathCounts {
    pub total: u128,
    pub negative: u128,
}

/// Counts the paths from input `feature` to the output. Edges with weight
/// exactly zero are not paths. Counts saturate at `u128::MAX`.
pub fn count_negative_paths(net: &MlpNetwork, feature: usize) -> Result<PathCounts> {
    if feature >= net.input_dim {
        return Err(Error::Input(format!(
            "feature {feature} out of range for input dimension {}",
            net.input_dim
        )));
    }
    // (positive, negative) path counts ending at each node.
    let width = net.block_input_dim();
    let mut pos = vec![0u128; width];
    let mut neg = vec![0u128; width];
    match &net.projection {
        None => pos[feature] = 1,
        Some(p) => {
            if let Some(k) = p.monotone.iter().position(|&i| i == feature) {
                pos[k] = 1;
            } else {
                let c = p.free.iter().position(|&i| i == feature).expect("free feature");
                let offset = p.monotone.len();
                for r in 0..p.layer.out_dim() {
                    let w = p.layer.weights.get(r, c);
                    if w > 0.0 {
                        pos[offset + r] = 1;
                    } else if w < 0.0 {
                        neg[offset + r] = 1;
                    }
                }
            }
        }
    }
    for layer in &net.layers {
        let mut next_pos = vec![0u128; layer.out_dim()];
        let mut next_neg = vec![0u128; layer.out_dim()];
        for r in 0..layer.out_dim() {
            for (c, &w) in layer.weights.row(r).iter().enumerate() {
                let (same, flip) = if w > 0.0 {
                    (pos[c], neg[c])
                } else if w < 0.0 {
                    (neg[c], pos[c])
                } else {
                    continue;
                };
                next_pos[r] = next_pos[r].saturating_add(same);
                next_neg[r] = next_neg[r].saturating_add(flip);
            }
        }
        pos = next_pos;
        neg = next_neg;
    }
    Ok(PathCounts {
        total: pos[0].saturating_add(neg[0]),
        negative: neg[0],
    })
}
