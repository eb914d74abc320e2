use super::{build_policy, rng_stream, PpoAgent, RunContext, RunRecord, RunSetup, Trainer, TrainerConfig, INIT_STREAM};
use crate::ppo::AgentTag;
use crate::replay::{r3_fit_threshold, CyclicBuffer};
use crate::Result;

/// One agent, one success buffer; replays a random stored trajectory after
/// every episode and drops it when its fit falls below the R3 schedule.
pub struct WeakR3Trainer {
    ctx: RunContext,
    cfg: TrainerConfig,
    pub agent: PpoAgent,
    pub buffer: CyclicBuffer,
}

impl WeakR3Trainer {
    pub fn new(setup: &RunSetup) -> Result<WeakR3Trainer> {
        let ctx = RunContext::new(setup)?;
        let mut init = rng_stream(setup.seed, INIT_STREAM);
        let net = build_policy(setup, &ctx.spec, true, setup.ppo.entropy_coef, &mut init);
        Ok(WeakR3Trainer {
            agent: PpoAgent::new(net, setup.adam, setup.ppo, AgentTag::Ppo),
            buffer: CyclicBuffer::new(setup.trainer.capacity_b),
            cfg: setup.trainer.clone(),
            ctx,
        })
    }
}

impl Trainer for WeakR3Trainer {
    fn run_episode(&mut self) -> Result<RunRecord> {
        let traj = self.ctx.collect(&self.agent)?;
        if traj.success {
            self.buffer.insert(traj.clone());
        }
        let stats = self.agent.train(&traj)?;
        if !self.buffer.is_empty() {
            let idx = self.buffer.sample_uniform(&mut self.ctx.replay_rng)?;
            let threshold = r3_fit_threshold(self.buffer.len());
            let replayed = self.buffer.get(idx).expect("sampled index").trajectory.clone();
            let outcome = self.agent.replay(&replayed, self.cfg.sigma)?;
            if outcome.fit < threshold {
                self.buffer.drop(idx)?;
            }
        }
        Ok(self.ctx.record(
            traj.total_reward,
            traj.success,
            "weak_r3",
            (self.buffer.len(), 0),
            stats.first().copied(),
        ))
    }

    fn context(&self) -> &RunContext {
        &self.ctx
    }
}
