//! The outer loop: fit, verify, and raise `lambda` until every block is
//! certified or the escalation budget runs out.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::fit::{fit, FitOutcome, LossRecord};
use crate::certify::{verify_network, VerificationReport, VerifyOptions};
use crate::data::Dataset;
use crate::model::{InputBox, MlpNetwork};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationRecord {
    pub escalation: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub final_loss: f64,
    pub final_penalty: f64,
    /// Learning-rate reductions needed before the fit succeeded.
    pub backoffs: usize,
    pub verification: VerificationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainOutcome {
    Certified,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub escalations: Vec<EscalationRecord>,
    pub outcome: TrainOutcome,
    /// Escalation whose network was returned.
    pub selected: usize,
    /// Epochs are numbered consecutively across escalations.
    pub loss_curve: Vec<LossRecord>,
}

impl TrainReport {
    pub fn selected_record(&self) -> &EscalationRecord {
        &self.escalations[self.selected]
    }

    /// Writes the loss curve as CSV with header
    /// `epoch,task_loss,penalty,lambda`.
    pub fn write_loss_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.loss_curve {
            w.serialize(r).map_err(|e| Error::Config(format!("loss curve: {e}")))?;
        }
        w.flush().map_err(|e| Error::Config(format!("loss curve: {e}")))?;
        Ok(())
    }
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>4} {:>10} {:>10} {:>12} {:>12} {:>14} {:>10}",
            "step", "lambda", "lr", "loss", "penalty", "U_alpha", "status"
        )?;
        for r in &self.escalations {
            writeln!(
                f,
                "{:>4} {:>10.3e} {:>10.3e} {:>12.5e} {:>12.5e} {:>14.6e} {:>10}",
                r.escalation,
                r.lambda,
                r.learning_rate,
                r.final_loss,
                r.final_penalty,
                r.verification.u_alpha,
                r.verification.status
            )?;
        }
        write!(f, "outcome: {} (escalation {})", self.outcome, self.selected)
    }
}

impl fmt::Display for TrainOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainOutcome::Certified => "certified",
            TrainOutcome::Exhausted => "exhausted",
        })
    }
}

/// Fits with learning-rate backoff. On divergence the network is restored
/// and the rate multiplied by `lr_backoff_factor`.
fn fit_with_backoff(
    net: &mut MlpNetwork,
    data: &Dataset,
    config: &mut TrainConfig,
    lambda: f64,
) -> Result<(FitOutcome, usize)> {
    let snapshot = net.clone();
    let mut backoffs = 0;
    loop {
        match fit(net, data, config, lambda) {
            Ok(out) => return Ok((out, backoffs)),
            Err(Error::Diverged(msg)) if backoffs < config.max_backoffs => {
                log::warn!("{msg}; reducing the learning rate");
                *net = snapshot.clone();
                config.learning_rate *= config.lr_backoff_factor;
                backoffs += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Trains and verifies `net` on `data`, starting at `lambda_init` and
/// multiplying by `lambda_factor` after each failed verification, for at
/// most `max_escalations` increases. Each round continues from the previous
/// round's weights.
///
/// Returns the first certified network, or else the one with the largest
/// certified bound.
pub fn certify_train_loop(
    net: MlpNetwork,
    data: &Dataset,
    config: &TrainConfig,
    verify: &VerifyOptions,
) -> Result<(MlpNetwork, TrainReport)> {
    config.validate()?;
    if net.monotone.is_empty() {
        return Err(Error::Input("no monotone features to certify".into()));
    }
    let unit = InputBox::unit(net.input_dim);
    let mut cfg = config.clone();
    let mut net = net;
    let mut lambda = config.lambda_init;
    let mut records = Vec::new();
    let mut curve: Vec<LossRecord> = Vec::new();
    let mut best: Option<(f64, usize, MlpNetwork)> = None;

    for escalation in 0..=config.max_escalations {
        cfg.seed = config.seed.wrapping_add(escalation as u64);
        let (out, backoffs) = fit_with_backoff(&mut net, data, &mut cfg, lambda)?;
        let offset = curve.len();
        curve.extend(out.curve.into_iter().map(|r| LossRecord {
            epoch: r.epoch + offset,
            ..r
        }));
        let verification = verify_network(&net, &unit, verify)?;
        log::info!(
            "escalation {escalation}: lambda {lambda:e}, loss {:.6e}, U_alpha {:.6e}",
            out.final_loss,
            verification.u_alpha
        );
        let certified = verification.certified;
        let u = verification.u_alpha;
        records.push(EscalationRecord {
            escalation,
            lambda,
            learning_rate: cfg.learning_rate,
            final_loss: out.final_loss,
            final_penalty: out.final_penalty,
            backoffs,
            verification,
        });
        if certified {
            return Ok((
                net,
                TrainReport {
                    escalations: records,
                    outcome: TrainOutcome::Certified,
                    selected: escalation,
                    loss_curve: curve,
                },
            ));
        }
        if best.as_ref().is_none_or(|b| u >= b.0) {
            best = Some((u, escalation, net.clone()));
        }
        lambda *= config.lambda_factor;
    }
    let (_, selected, net) = best.expect("at least one escalation");
    Ok((
        net,
        TrainReport {
            escalations: records,
            outcome: TrainOutcome::Exhausted,
            selected,
            loss_curve: curve,
        },
    ))
}
