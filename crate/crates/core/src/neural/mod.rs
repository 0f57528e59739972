//! Small feed-forward actor-critic network with hand-written gradients.

mod a2c;
mod adam;
mod checkpoint;
mod net;

use thiserror::Error;

pub use a2c::{a2c_gradients, a2c_update, td_advantage, LossConfig, LossStats, Step};
pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use net::{masked_softmax, ActorHead, ForwardCache, PolicyNet};

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("mask has no admissible entry")]
    EmptyMask,
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("step {step}: action {action} is masked out")]
    MaskedAction { step: usize, action: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
