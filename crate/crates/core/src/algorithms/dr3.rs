use super::{
    build_policy, degenerate_check, rng_stream, DegenerateRule, PpoAgent, RunContext, RunRecord, RunSetup,
    SuccessTracker, Trainer, TrainerConfig, INIT_STREAM,
};
use crate::ppo::AgentTag;
use crate::replay::{dr3_admit, dr3_select, CyclicBuffer, RewardStats, ThresholdEvent};
use crate::Result;

/// Dense-reward replay: admit trajectories by reward statistics and replay
/// stored ones that beat the current episode by at least one buffer std.
pub struct Dr3Trainer {
    ctx: RunContext,
    cfg: TrainerConfig,
    pub agent: PpoAgent,
    pub buffer: CyclicBuffer,
    pub stats: RewardStats,
    pub tracker: SuccessTracker,
    pub degenerate: bool,
    rule: DegenerateRule,
}

impl Dr3Trainer {
    pub fn new(setup: &RunSetup) -> Result<Dr3Trainer> {
        let ctx = RunContext::new(setup)?;
        let mut init = rng_stream(setup.seed, INIT_STREAM);
        let net = build_policy(setup, &ctx.spec, true, setup.ppo.entropy_coef, &mut init);
        let cutoff = setup
            .trainer
            .degenerate_cutoff
            .unwrap_or(ctx.spec.max_total_reward / 2.0);
        Ok(Dr3Trainer {
            agent: PpoAgent::new(net, setup.adam, setup.ppo, AgentTag::Ppo),
            buffer: CyclicBuffer::new(setup.trainer.capacity_dr3),
            stats: RewardStats::default(),
            tracker: SuccessTracker::new(setup.trainer.success_rate_window),
            degenerate: false,
            rule: DegenerateRule::MeanReward { cutoff },
            cfg: setup.trainer.clone(),
            ctx,
        })
    }
}

impl Trainer for Dr3Trainer {
    fn run_episode(&mut self) -> Result<RunRecord> {
        // Tagged by the mode this episode ran in.
        let tag = if self.degenerate { "degenerate" } else { "dr3" };
        let traj = self.ctx.collect(&self.agent)?;
        let reward = traj.total_reward;
        self.stats.push(reward);
        let schedule = self.cfg.dr3_schedule;
        if !self.degenerate && dr3_admit(reward, &self.buffer, &self.stats) {
            self.buffer.admit_dr3(traj.clone(), &schedule);
        }
        let train_stats = self.agent.train(&traj)?;
        if !self.degenerate {
            if let Some(idx) = dr3_select(&self.buffer, reward, &mut self.ctx.replay_rng) {
                let replayed = self.buffer.get(idx).expect("selected index").trajectory.clone();
                let outcome = self.agent.replay(&replayed, self.cfg.sigma)?;
                self.buffer.dr3_threshold_update(ThresholdEvent::EntryUsed(idx), &schedule)?;
                if outcome.fit < self.buffer.get(idx).expect("selected index").fit_threshold {
                    self.buffer.drop(idx)?;
                }
            }
        }
        self.tracker.push(reward);
        if !self.degenerate && degenerate_check(&self.tracker, self.rule) {
            self.degenerate = true;
            log::info!("episode {}: mean reward cutoff reached, replay disabled", self.ctx.episodes);
        }
        Ok(self.ctx.record(
            reward,
            traj.success,
            tag,
            (self.buffer.len(), 0),
            train_stats.first().copied(),
        ))
    }

    fn context(&self) -> &RunContext {
        &self.ctx
    }
}
