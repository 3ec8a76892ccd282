use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of the per-sample penalty on a partial derivative `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyForm {
    /// `max(0, b - g)^2`: pushes every derivative above the margin `b`.
    Margin,
    /// `max(b, -g)^2`: never zero, only penalizes derivatives below `-b`.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda_init: f64,
    pub lambda_factor: f64,
    pub margin_b: f64,
    pub penalty_form: PenaltyForm,
    /// Penalty samples per block and optimizer step.
    pub sampler_size: usize,
    pub learning_rate: f64,
    pub lr_backoff_factor: f64,
    pub max_backoffs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub max_escalations: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda_init: 1.0,
            lambda_factor: 10.0,
            margin_b: 0.01,
            penalty_form: PenaltyForm::Margin,
            sampler_size: 1024,
            learning_rate: 5e-3,
            lr_backoff_factor: 0.5,
            max_backoffs: 5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 100,
            batch_size: 64,
            seed: 0,
            max_escalations: 6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_init", self.lambda_init),
            ("learning_rate", self.learning_rate),
            ("lr_backoff_factor", self.lr_backoff_factor),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.margin_b >= 0.0) {
            return Err(Error::Config("margin_b must be non-negative".into()));
        }
        if !(self.lambda_factor > 1.0) {
            return Err(Error::Config("lambda_factor must exceed 1".into()));
        }
        if self.lr_backoff_factor >= 1.0 {
            return Err(Error::Config("lr_backoff_factor must be below 1".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if self.sampler_size == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "sampler_size, epochs and batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_checked() {
        TrainConfig::default().validate().unwrap();
        let bad = TrainConfig {
            lambda_factor: 1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let text = toml::to_string(&TrainConfig::default()).unwrap();
        let back: TrainConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, TrainConfig::default());
    }
}
