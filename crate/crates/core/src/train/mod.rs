//! Training with the sampled monotonicity penalty, and the loop that
//! alternates training with verification.

mod config;
mod escalation;
mod fit;
mod optim;
mod penalty;

pub use config::{PenaltyForm, TrainConfig};
pub use escalation::{certify_train_loop, EscalationRecord, TrainOutcome, TrainReport};
pub use fit::{accuracy, fit, task_loss, FitOutcome, LossRecord};
pub use penalty::{
    layerwise_penalty, layerwise_penalty_on, penalty_value_and_grad, sample_block_inputs, BlockGradient,
    Penalty,
};
