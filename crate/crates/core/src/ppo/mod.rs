//! Advantage estimation, the clipped PPO surrogate, and the DDQN update.

mod ddqn;
mod gae;
mod surrogate;
mod trajectory;

pub use ddqn::{ddqn_target, ddqn_update, DdqnLearner, DqnTransition};
pub use gae::{compute_gae, gae_from_parts, normalize, AdvantageSet};
pub use surrogate::{
    advantages_for, optimize, ppo_clip_loss, train_on_trajectory, LossBreakdown, PpoConfig, SurrogateObjective,
    SurrogateTerm, TrainStats,
};
pub use trajectory::{read_step_records, AgentTag, StepRecord, Trajectory, Transition};
