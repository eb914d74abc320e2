//! Small policy networks with hand-derived gradients.

mod adam;
pub mod checkpoint;
mod dist;
mod layers;
mod policy;

pub use adam::{adam_step, sgd_step, AdamConfig, AdamState, Optimizer};
pub use dist::{action_distribution, argmax, entropy, entropy_grad_logits, prob_grad_logits, sample_action};
pub use layers::{Activation, Conv2d, Dense};
pub use policy::{ForwardOutput, Gradients, InputLayout, NetConfig, PolicyParams, Tape};

/// Deep copy; the copy shares nothing with `src`.
pub fn clone_params(src: &PolicyParams) -> PolicyParams {
    src.clone()
}
