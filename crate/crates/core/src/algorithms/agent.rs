use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::envs::{Env, Observation};
use crate::nets::{action_distribution, sample_action, AdamConfig, Optimizer, PolicyParams};
use crate::ppo::{train_on_trajectory, AgentTag, PpoConfig, TrainStats, Trajectory, Transition};
use crate::replay::{train_on_replay, ReplayOutcome};
use crate::Result;

/// Anything that can pick actions and report the probability it used.
pub trait Behavior {
    fn act(&self, obs: &Observation, rng: &mut ChaCha8Rng) -> Result<(usize, f64)>;
    fn tag(&self) -> AgentTag;
}

/// A policy network with its optimizer and PPO settings.
#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub net: PolicyParams,
    pub opt: Optimizer,
    pub adam: AdamConfig,
    pub cfg: PpoConfig,
    pub tag: AgentTag,
}

impl PpoAgent {
    pub fn new(net: PolicyParams, adam: AdamConfig, cfg: PpoConfig, tag: AgentTag) -> PpoAgent {
        PpoAgent {
            opt: Optimizer::adam(&net, adam),
            net,
            adam,
            cfg,
            tag,
        }
    }

    pub fn train(&mut self, traj: &Trajectory) -> Result<TrainStats> {
        train_on_trajectory(&mut self.net, &mut self.opt, traj, &self.cfg)
    }

    pub fn replay(&mut self, traj: &Trajectory, sigma: f64) -> Result<ReplayOutcome> {
        train_on_replay(&mut self.net, &mut self.opt, traj, sigma, &self.cfg)
    }

    /// Takes `src`'s actor weights and restarts the optimizer.
    pub fn sync_actor_from(&mut self, src: &PolicyParams) -> Result<()> {
        self.net.copy_actor_from(src)?;
        self.opt = Optimizer::adam(&self.net, self.adam);
        Ok(())
    }
}

impl Behavior for PpoAgent {
    fn act(&self, obs: &Observation, rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
        let dist = action_distribution(&self.net.forward(obs)?.logits);
        Ok(sample_action(&dist, rng))
    }

    fn tag(&self) -> AgentTag {
        self.tag
    }
}

/// Uniform random decision maker standing in for the initiator.
#[derive(Debug, Clone, Copy)]
pub struct RandomBehavior {
    pub action_count: usize,
}

pub fn random_initiator_action<R: Rng + ?Sized>(action_count: usize, rng: &mut R) -> (usize, f64) {
    (rng.gen_range(0..action_count), 1.0 / action_count as f64)
}

impl Behavior for RandomBehavior {
    fn act(&self, _obs: &Observation, rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
        Ok(random_initiator_action(self.action_count, rng))
    }

    fn tag(&self) -> AgentTag {
        AgentTag::RandomInitiator
    }
}

/// Runs one full episode, recording the behavior probability of each action.
pub fn collect_trajectory(
    env: &mut Env,
    behavior: &dyn Behavior,
    rng: &mut ChaCha8Rng,
    episode_index: usize,
) -> Result<Trajectory> {
    let mut obs = env.reset();
    let mut transitions = Vec::new();
    let mut success = false;
    loop {
        let (action, prob) = behavior.act(&obs, rng)?;
        let step = env.step(action)?;
        success |= step.success;
        transitions.push(Transition {
            obs,
            action,
            behavior_prob: prob,
            reward: step.reward,
            done: step.done,
        });
        if step.done {
            break;
        }
        obs = step.observation;
    }
    Ok(Trajectory::new(transitions, success, behavior.tag(), episode_index))
}
