use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_policy, rng_stream, PpoAgent, RunContext, RunRecord, RunSetup, Trainer, INIT_STREAM};
use crate::nets::{argmax, AdamConfig, Optimizer, PolicyParams};
use crate::ppo::{AgentTag, DdqnLearner, DqnTransition};
use crate::Result;

/// Plain PPO: collect one trajectory, train on it, repeat.
pub struct PpoTrainer {
    ctx: RunContext,
    pub agent: PpoAgent,
}

impl PpoTrainer {
    pub fn new(setup: &RunSetup) -> Result<PpoTrainer> {
        let ctx = RunContext::new(setup)?;
        let mut init = rng_stream(setup.seed, INIT_STREAM);
        let net = build_policy(setup, &ctx.spec, true, setup.ppo.entropy_coef, &mut init);
        Ok(PpoTrainer {
            agent: PpoAgent::new(net, setup.adam, setup.ppo, AgentTag::Ppo),
            ctx,
        })
    }
}

impl Trainer for PpoTrainer {
    fn run_episode(&mut self) -> Result<RunRecord> {
        let traj = self.ctx.collect(&self.agent)?;
        let stats = self.agent.train(&traj)?;
        Ok(self
            .ctx
            .record(traj.total_reward, traj.success, "ppo", (0, 0), stats.first().copied()))
    }

    fn context(&self) -> &RunContext {
        &self.ctx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdqnConfig {
    pub buffer_size: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub lr: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Env steps over which ε anneals linearly.
    pub eps_decay_steps: usize,
    pub learning_starts: usize,
    /// Gradient updates between target-network syncs.
    pub target_sync: usize,
    pub train_every: usize,
}

impl Default for DdqnConfig {
    fn default() -> Self {
        DdqnConfig {
            buffer_size: 100_000,
            batch_size: 64,
            gamma: 0.99,
            lr: 3e-4,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 20_000,
            learning_starts: 1_000,
            target_sync: 1_000,
            train_every: 1,
        }
    }
}

impl DdqnConfig {
    pub fn epsilon(&self, step: usize) -> f64 {
        if step >= self.eps_decay_steps {
            return self.eps_end;
        }
        let frac = step as f64 / self.eps_decay_steps as f64;
        self.eps_start + frac * (self.eps_end - self.eps_start)
    }
}

/// ε-greedy over Q-values; greedy ties go to the lowest action id.
pub fn epsilon_greedy<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q_values.len())
    } else {
        argmax(q_values)
    }
}

/// Double DQN with a uniform transition buffer and one update per step.
pub struct DdqnTrainer {
    ctx: RunContext,
    cfg: DdqnConfig,
    pub learner: DdqnLearner,
    buffer: VecDeque<DqnTransition>,
}

impl DdqnTrainer {
    pub fn new(setup: &RunSetup) -> Result<DdqnTrainer> {
        let ctx = RunContext::new(setup)?;
        let mut init = rng_stream(setup.seed, INIT_STREAM);
        let q: PolicyParams = build_policy(setup, &ctx.spec, false, 0.0, &mut init);
        let adam = AdamConfig {
            lr: setup.ddqn.lr,
            ..setup.adam
        };
        let opt = Optimizer::adam(&q, adam);
        Ok(DdqnTrainer {
            learner: DdqnLearner::new(q, opt, setup.ddqn.gamma, setup.ddqn.target_sync),
            cfg: setup.ddqn,
            buffer: VecDeque::with_capacity(setup.ddqn.buffer_size.min(1 << 16)),
            ctx,
        })
    }
}

fn sample_batch(batch_size: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..batch_size).map(|_| rng.gen_range(0..len)).collect()
}

impl Trainer for DdqnTrainer {
    fn run_episode(&mut self) -> Result<RunRecord> {
        let mut obs = self.ctx.env.reset();
        let mut total = 0.0;
        let mut success = false;
        let mut loss_sum = 0.0;
        let mut updates = 0usize;
        loop {
            let eps = self.cfg.epsilon(self.ctx.steps);
            let q_values = self.learner.q.forward(&obs)?.logits;
            let action = epsilon_greedy(&q_values, eps, &mut self.ctx.action_rng);
            let step = self.ctx.env.step(action)?;
            self.ctx.steps += 1;
            total += step.reward;
            success |= step.success;
            if self.buffer.len() == self.cfg.buffer_size {
                self.buffer.pop_front();
            }
            self.buffer.push_back(DqnTransition {
                obs,
                action,
                reward: step.reward,
                next_obs: step.observation.clone(),
                terminal: step.done && !step.truncated,
            });
            if self.buffer.len() >= self.cfg.learning_starts.max(1)
                && self.ctx.steps.is_multiple_of(self.cfg.train_every.max(1))
            {
                let idx = sample_batch(self.cfg.batch_size, self.buffer.len(), &mut self.ctx.replay_rng);
                let batch: Vec<&DqnTransition> = idx.iter().map(|&i| &self.buffer[i]).collect();
                loss_sum += self.learner.update(&batch)?;
                updates += 1;
            }
            if step.done {
                break;
            }
            obs = step.observation;
        }
        let diag = (updates > 0).then(|| crate::ppo::LossBreakdown {
            total: loss_sum / updates as f64,
            value_loss: loss_sum / updates as f64,
            ..Default::default()
        });
        Ok(self.ctx.record(total, success, "ddqn", (self.buffer.len(), 0), diag))
    }

    fn context(&self) -> &RunContext {
        &self.ctx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn full_exploration_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[epsilon_greedy(&[9.0, 0.0, 0.0], 1.0, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn zero_epsilon_is_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(&[0.1, 2.0, -1.0], 0.0, &mut rng), 1);
        }
    }

    #[test]
    fn epsilon_anneals_linearly() {
        let cfg = DdqnConfig {
            eps_decay_steps: 100,
            ..DdqnConfig::default()
        };
        assert_eq!(cfg.epsilon(0), 1.0);
        assert!((cfg.epsilon(50) - 0.525).abs() < 1e-12);
        assert_eq!(cfg.epsilon(1000), 0.05);
    }
}
