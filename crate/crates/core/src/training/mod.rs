//! Adam optimization, mini-batching, the epoch loop and checkpoints.

mod adam;
mod checkpoint;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{Checkpoint, CheckpointKind};
pub use train::{
    apply_gradients, dev_metric, epoch_batches, instances, resume, train, Batch, EpochMetrics, TrainConfig,
    TrainOutcome,
};
