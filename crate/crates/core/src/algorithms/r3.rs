//! R3: initiator, explorers and exploiter around two success buffers.

use std::fmt;

use rand::Rng;

use super::{
    build_policy, degenerate_check, rng_stream, Behavior, DegenerateRule, PhaseEvent, PpoAgent, RandomBehavior,
    RunContext, RunRecord, RunSetup, SuccessTracker, Trainer, TrainerConfig, INIT_STREAM,
};
use crate::ppo::{AgentTag, Trajectory};
use crate::replay::{r3_fit_threshold, CyclicBuffer};
use crate::Result;

pub const INITIATOR_ENTROPY: f64 = 0.5;
pub const EXPLORER1_ENTROPY: f64 = 0.03;
pub const EXPLORER2_ENTROPY: f64 = 0.02;
pub const EXPLOITER_ENTROPY: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Starting,
    Exploiting,
    Exploring,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Starting => "starting",
            Phase::Exploiting => "exploiting",
            Phase::Exploring => "exploring",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseState {
    pub phase: Phase,
    pub any_reward_seen: bool,
    /// Explorers still need X's actor weights for the current exploring phase.
    pub explorer_sync_pending: bool,
}

impl PhaseState {
    pub fn initial() -> PhaseState {
        PhaseState {
            phase: Phase::Starting,
            any_reward_seen: false,
            explorer_sync_pending: false,
        }
    }

    /// The phase implied by the reward flag and buffer occupancy.
    pub fn derive(any_reward_seen: bool, buffer_empty: bool) -> Phase {
        if !any_reward_seen {
            Phase::Starting
        } else if buffer_empty {
            Phase::Exploring
        } else {
            Phase::Exploiting
        }
    }

    pub fn consistent_with(&self, buffer_empty: bool) -> bool {
        self.phase == PhaseState::derive(self.any_reward_seen, buffer_empty)
    }
}

pub struct R3Trainer {
    ctx: RunContext,
    cfg: TrainerConfig,
    pub initiator: PpoAgent,
    pub explorer1: PpoAgent,
    pub explorer2: PpoAgent,
    pub exploiter: PpoAgent,
    pub b: CyclicBuffer,
    pub b_large: CyclicBuffer,
    pub state: PhaseState,
    pub tracker: SuccessTracker,
    /// Replay permanently off once the success rate crossed the cutoff.
    pub degenerate: bool,
    rule: DegenerateRule,
    events: Vec<PhaseEvent>,
}

impl R3Trainer {
    pub fn new(setup: &RunSetup) -> Result<R3Trainer> {
        let ctx = RunContext::new(setup)?;
        let mut init = rng_stream(setup.seed, INIT_STREAM);
        let spec = ctx.spec;
        let actor_cfg = setup.ppo.with_epochs(setup.trainer.explorer_epochs);
        let mut make = |critic: bool, entropy: f64, cfg, tag| {
            let net = build_policy(setup, &spec, critic, entropy, &mut init);
            PpoAgent::new(net, setup.adam, cfg, tag)
        };
        let exploiter = make(true, EXPLOITER_ENTROPY, setup.ppo, AgentTag::Exploiter);
        let initiator = make(false, INITIATOR_ENTROPY, actor_cfg, AgentTag::Initiator);
        let explorer1 = make(false, EXPLORER1_ENTROPY, actor_cfg, AgentTag::Explorer1);
        let explorer2 = make(false, EXPLORER2_ENTROPY, actor_cfg, AgentTag::Explorer2);
        Ok(R3Trainer {
            initiator,
            explorer1,
            explorer2,
            exploiter,
            b: CyclicBuffer::new(setup.trainer.capacity_b),
            b_large: CyclicBuffer::new(setup.trainer.capacity_b_large),
            state: PhaseState::initial(),
            tracker: SuccessTracker::new(setup.trainer.success_rate_window),
            degenerate: false,
            rule: DegenerateRule::SuccessRate {
                cutoff: setup.trainer.degenerate_cutoff.unwrap_or(0.5),
            },
            events: Vec::new(),
            cfg: setup.trainer.clone(),
            ctx,
        })
    }

    fn starting_episode(&mut self) -> Result<(Trajectory, Option<crate::ppo::LossBreakdown>)> {
        let traj = if self.cfg.random_initiator {
            let random = RandomBehavior {
                action_count: self.ctx.spec.action_count,
            };
            self.ctx.collect(&random)?
        } else {
            let traj = self.ctx.collect(&self.initiator)?;
            self.initiator.train(&traj)?;
            traj
        };
        let stats = self.exploiter.train(&traj)?;
        Ok((traj, stats.first().copied()))
    }

    fn exploiting_episode(&mut self) -> Result<(Trajectory, Option<crate::ppo::LossBreakdown>)> {
        let traj = self.ctx.collect(&self.exploiter)?;
        let stats = self.exploiter.train(&traj)?;
        if !traj.success {
            let idx = self.b.sample_uniform(&mut self.ctx.replay_rng)?;
            let threshold = r3_fit_threshold(self.b.len());
            let replayed = self.b.get(idx).expect("sampled index").trajectory.clone();
            let outcome = self.exploiter.replay(&replayed, self.cfg.sigma)?;
            if outcome.fit < threshold {
                self.b.drop(idx)?;
            }
        }
        Ok((traj, stats.first().copied()))
    }

    fn exploring_episode(&mut self) -> Result<(Trajectory, Option<crate::ppo::LossBreakdown>)> {
        if self.state.explorer_sync_pending {
            self.explorer1.sync_actor_from(&self.exploiter.net)?;
            self.explorer2.sync_actor_from(&self.exploiter.net)?;
            self.state.explorer_sync_pending = false;
        }
        let use_first = self.ctx.replay_rng.gen_bool(0.5);
        let traj = {
            let explorer: &PpoAgent = if use_first { &self.explorer1 } else { &self.explorer2 };
            self.ctx.collect(explorer as &dyn Behavior)?
        };
        if use_first {
            self.explorer1.train(&traj)?;
        } else {
            self.explorer2.train(&traj)?;
        }
        let stats = self.exploiter.train(&traj)?;
        if !self.b_large.is_empty() {
            let idx = self.b_large.sample_uniform(&mut self.ctx.replay_rng)?;
            let replayed = self.b_large.get(idx).expect("sampled index").trajectory.clone();
            self.explorer2.replay(&replayed, self.cfg.sigma)?;
        }
        Ok((traj, stats.first().copied()))
    }
}

impl Trainer for R3Trainer {
    fn run_episode(&mut self) -> Result<RunRecord> {
        let before = self.state.phase;
        let (traj, diag, tag) = if self.degenerate {
            let traj = self.ctx.collect(&self.exploiter)?;
            let stats = self.exploiter.train(&traj)?;
            (traj, stats.first().copied(), "degenerate")
        } else {
            let (traj, diag) = match before {
                Phase::Starting => self.starting_episode()?,
                Phase::Exploiting => self.exploiting_episode()?,
                Phase::Exploring => self.exploring_episode()?,
            };
            (traj, diag, before.name())
        };

        if traj.success && !self.degenerate {
            self.b.insert(traj.clone());
            self.b_large.insert(traj.clone());
        }
        self.state.any_reward_seen |= traj.total_reward > 0.0;
        self.tracker.push_success(traj.success);
        if !self.degenerate && degenerate_check(&self.tracker, self.rule) {
            self.degenerate = true;
            log::info!("episode {}: success rate cutoff reached, replay disabled", self.ctx.episodes);
        }

        let after = PhaseState::derive(self.state.any_reward_seen, self.b.is_empty());
        if after != before {
            if after == Phase::Exploring {
                self.state.explorer_sync_pending = true;
            }
            let event = PhaseEvent {
                episode: self.ctx.episodes,
                from: before.name().into(),
                to: after.name().into(),
                buf_b: self.b.len(),
                buf_blarge: self.b_large.len(),
            };
            log::info!("episode {}: {} -> {}", event.episode, event.from, event.to);
            self.events.push(event);
        }
        self.state.phase = after;
        Ok(self.ctx.record(
            traj.total_reward,
            traj.success,
            tag,
            (self.b.len(), self.b_large.len()),
            diag,
        ))
    }

    fn context(&self) -> &RunContext {
        &self.ctx
    }

    fn events(&self) -> &[PhaseEvent] {
        &self.events
    }
}
