//! Rewarded region replay (R3) for on-policy agents.
//!
//! The crate is laid out bottom-up:
//!
//! - [`envs`]: Crossing, DoorKey and CartPole, deterministic per seed.
//! - [`nets`]: small dense/convolutional policies with hand-written gradients.
//! - [`ppo`]: GAE, the clipped surrogate and the DDQN update.
//! - [`replay`]: success buffers, truncated importance weighting, fit and eviction.
//! - [`algorithms`]: PPO, DDQN, Weak R3, R3 and DR3 training loops.
//! - [`harness`]: config files, seeded runs, CSV metrics, SVG plots, comparisons.

pub mod algorithms;
pub mod envs;
mod error;
pub mod harness;
pub mod nets;
pub mod ppo;
pub mod replay;

pub use error::{Error, Result};
