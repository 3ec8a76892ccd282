//! Mini-batch training on task loss plus `lambda` times the layer-wise
//! penalty.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::optim::{Adam, Slots};
use super::penalty::{layerwise_penalty_on, sample_block_inputs, Penalty};
use crate::data::{Dataset, Task};
use crate::model::{InputBox, MlpNetwork};
use crate::{Error, Result};

/// One row of the loss curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub task_loss: f64,
    pub penalty: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub curve: Vec<LossRecord>,
    /// Task loss on the whole dataset after the last epoch.
    pub final_loss: f64,
    /// Penalty on fresh samples after the last epoch.
    pub final_penalty: f64,
}

fn sample_loss(task: Task, f: f64, y: f64) -> (f64, f64) {
    match task {
        Task::Regression => ((f - y) * (f - y), 2.0 * (f - y)),
        // Binary cross-entropy on the logit `f`.
        Task::Classification => (
            f.max(0.0) - f * y + (-f.abs()).exp().ln_1p(),
            crate::model::sigmoid(f) - y,
        ),
    }
}

/// Mean squared error or mean cross-entropy over the dataset.
pub fn task_loss(net: &MlpNetwork, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Input("empty dataset".into()));
    }
    let mut total = 0.0;
    for (x, &y) in data.features.iter().zip(&data.targets) {
        total += sample_loss(data.task, net.forward(x)?, y).0;
    }
    Ok(total / data.len() as f64)
}

/// Fraction of correctly classified rows, thresholding the logit at 0.
pub fn accuracy(net: &MlpNetwork, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Input("empty dataset".into()));
    }
    let mut hits = 0usize;
    for (x, &y) in data.features.iter().zip(&data.targets) {
        hits += usize::from((net.forward(x)? >= 0.0) == (y == 1.0));
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Adds the gradient of the mean task loss over `rows` to `grad` and
/// returns the loss.
fn task_grad(net: &MlpNetwork, data: &Dataset, rows: &[usize], grad: &mut Slots) -> f64 {
    let scale = 1.0 / rows.len() as f64;
    let base = Slots::weight_slot(net, 0);
    let mut loss = 0.0;
    for &r in rows {
        let x = &data.features[r];
        let trace = net.trace(x);
        let (l, dl) = sample_loss(data.task, trace.output, data.targets[r]);
        loss += l;
        let mut delta = vec![dl * scale];
        for (k, layer) in net.layers.iter().enumerate().rev() {
            for (d, z) in delta.iter_mut().zip(&trace.pre[k]) {
                *d *= layer.activation.derivative(*z);
            }
            let input = &trace.inputs[k];
            let (gw, gb) = grad.0[base + 2 * k..].split_at_mut(1);
            for (i, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                gb[0][i] += d;
                let row = &mut gw[0][i * input.len()..(i + 1) * input.len()];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if k > 0 || net.projection.is_some() {
                delta = layer.weights.transpose_mul(&delta);
            }
        }
        if let Some(p) = &net.projection {
            let reduced = &delta[p.monotone.len()..];
            let (gw, gb) = grad.0.split_at_mut(1);
            for (row, d) in reduced.iter().enumerate() {
                gb[0][row] += d;
                for (c, &i) in p.free.iter().enumerate() {
                    gw[0][row * p.free.len() + c] += d * x[i];
                }
            }
        }
    }
    loss * scale
}

fn check_inputs(net: &MlpNetwork, data: &Dataset, config: &TrainConfig, lambda: f64) -> Result<()> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Input("cannot fit an empty dataset".into()));
    }
    if data.dim() != net.input_dim {
        return Err(Error::Input(format!(
            "dataset has {} features, network expects {}",
            data.dim(),
            net.input_dim
        )));
    }
    if !data.features.iter().flatten().all(|v| (0.0..=1.0).contains(v)) {
        return Err(Error::Input("features must be normalized to [0, 1]".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be non-negative, got {lambda}")));
    }
    net.validate()
}

/// Trains `net` in place for `config.epochs` epochs with learning rate
/// `config.learning_rate`. Penalty samples are redrawn at every step.
pub fn fit(net: &mut MlpNetwork, data: &Dataset, config: &TrainConfig, lambda: f64) -> Result<FitOutcome> {
    check_inputs(net, data, config, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let penalty = Penalty {
        margin: config.margin_b,
        form: config.penalty_form,
    };
    let unit = InputBox::unit(net.input_dim);
    let use_penalty = lambda > 0.0 && !net.monotone.is_empty();
    let mut adam = Adam::new(net, config.learning_rate, config.beta1, config.beta2, config.epsilon);
    let mut grad = Slots::zeros(net);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut pen_sum, mut steps) = (0.0, 0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            grad.fill(0.0);
            let loss = task_grad(net, data, batch, &mut grad);
            let mut pen = 0.0;
            if use_penalty {
                let samples = sample_block_inputs(net, &unit, config.sampler_size, &mut rng)?;
                let (v, block_grads) = layerwise_penalty_on(net, &samples, penalty)?;
                pen = v;
                for (b, g) in block_grads.iter().enumerate() {
                    for (slot, m) in [(2 * b, &g.first), (2 * b + 1, &g.second)] {
                        let s = Slots::weight_slot(net, slot);
                        for (t, v) in grad.0[s].iter_mut().zip(m.data()) {
                            *t += lambda * v;
                        }
                    }
                }
            }
            if !loss.is_finite() || !pen.is_finite() {
                return Err(Error::Diverged(format!(
                    "epoch {epoch}: task loss {loss}, penalty {pen} at learning rate {}",
                    config.learning_rate
                )));
            }
            adam.step(net, &grad);
            loss_sum += loss;
            pen_sum += pen;
            steps += 1;
        }
        if net.validate().is_err() {
            return Err(Error::Diverged(format!(
                "epoch {epoch}: parameters became non-finite at learning rate {}",
                config.learning_rate
            )));
        }
        if !use_penalty && !net.monotone.is_empty() {
            let samples = sample_block_inputs(net, &unit, config.sampler_size, &mut rng)?;
            pen_sum = layerwise_penalty_on(net, &samples, penalty).map_or(f64::NAN, |p| p.0) * steps as f64;
        }
        let record = LossRecord {
            epoch,
            task_loss: loss_sum / steps as f64,
            penalty: pen_sum / steps as f64,
            lambda,
        };
        log::debug!(
            "epoch {epoch}: loss {:.6e} penalty {:.6e} lambda {lambda}",
            record.task_loss,
            record.penalty
        );
        curve.push(record);
    }

    let final_loss = task_loss(net, data)?;
    let final_penalty = if net.monotone.is_empty() {
        0.0
    } else {
        let samples = sample_block_inputs(net, &unit, config.sampler_size, &mut rng)?;
        layerwise_penalty_on(net, &samples, penalty).map_or(f64::NAN, |p| p.0)
    };
    if !final_loss.is_finite() {
        return Err(Error::Diverged(format!("final task loss {final_loss}")));
    }
    Ok(FitOutcome {
        curve,
        final_loss,
        final_penalty,
    })
}
