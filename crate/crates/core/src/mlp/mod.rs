//! From-scratch 8-128-256-390 ReLU regressor that imitates a planner.

mod checkpoint;
mod infer;
mod model;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest, CHECKPOINT_FORMAT};
pub use infer::{infer_path, median_inference_time, snap_to_grid, NnPrediction};
pub use model::{init_xavier, init_xavier_dims, Dense, MlpModel, LAYER_DIMS};
pub use train::{
    adam_step, adam_update, backward, dataset_loss, masked_mse, train, train_model, AdamState, EarlyStopping,
    Example, Gradients, TrainConfig, TrainReport,
};
