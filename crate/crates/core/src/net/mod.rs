//! Dense `f64` tensors, a small fully convolutional network with hand-written
//! backward passes, and SGD with momentum.

mod checkpoint;
mod gradcheck;
mod model;
pub mod ops;
mod optim;
mod tensor;

pub use checkpoint::{
    fingerprint, from_checkpoint_str, load_checkpoint, save_checkpoint, to_checkpoint_string, CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
};
pub use gradcheck::{gradient_check, relative_error, GradCheckOptions, GradCheckReport};
pub use model::{FcnConfig, FcnModel, Layer, LayerSpec, Trace};
pub use ops::{huber, NormMode};
pub use optim::{OptimizerState, DEFAULT_LEARNING_RATE, DEFAULT_MOMENTUM, DEFAULT_WEIGHT_DECAY};
pub use tensor::Tensor;
