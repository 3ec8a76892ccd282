//! Adam over the network parameters, which are viewed as a list of slots:
//! projection weights and biases (when present), then weights and biases of
//! every layer.

use crate::model::{Layer, MlpNetwork};

/// One buffer per parameter slot, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Slots(pub Vec<Vec<f64>>);

impl Slots {
    pub fn zeros(net: &MlpNetwork) -> Self {
        Slots(layers(net).flat_map(|l| [vec![0.0; l.weights.data().len()], vec![0.0; l.biases.len()]]).collect())
    }

    /// Index of layer `k`'s weight slot; its bias slot follows.
    pub fn weight_slot(net: &MlpNetwork, k: usize) -> usize {
        2 * (k + usize::from(net.projection.is_some()))
    }

    pub fn fill(&mut self, v: f64) {
        for s in &mut self.0 {
            s.fill(v);
        }
    }
}

fn layers(net: &MlpNetwork) -> impl Iterator<Item = &Layer> {
    net.projection.iter().map(|p| &p.layer).chain(&net.layers)
}

fn layers_mut(net: &mut MlpNetwork) -> impl Iterator<Item = &mut Layer> {
    net.projection.iter_mut().map(|p| &mut p.layer).chain(&mut net.layers)
}

#[derive(Debug, Clone)]
pub(crate) struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Slots,
    v: Slots,
}

impl Adam {
    pub fn new(net: &MlpNetwork, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: Slots::zeros(net),
            v: Slots::zeros(net),
        }
    }

    /// One update. Frozen layers and masked weights are left untouched.
    pub fn step(&mut self, net: &mut MlpNetwork, grad: &Slots) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let mut slot = 0;
        for layer in layers_mut(net) {
            for is_weight in [true, false] {
                let (m, v, g) = (&mut self.m.0[slot], &mut self.v.0[slot], &grad.0[slot]);
                slot += 1;
                if layer.frozen {
                    continue;
                }
                let mask = if is_weight { layer.mask.as_deref() } else { None };
                let params = if is_weight {
                    layer.weights.data_mut()
                } else {
                    &mut layer.biases[..]
                };
                for k in 0..params.len() {
                    if mask.is_some_and(|mk| !mk[k]) {
                        continue;
                    }
                    m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                    v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                    params[k] -= self.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + self.eps);
                }
            }
        }
        net.enforce_masks();
    }
}
