//! Training loops: PPO and DDQN baselines, Weak R3, R3 and DR3.
//!
//! Every loop is an episode-stepped state machine implementing [`Trainer`].
//! Randomness comes from independent ChaCha streams derived from the run
//! seed: the environment owns stream 0, action sampling uses stream 1,
//! buffer sampling and coin flips stream 2, weight init stream 3.
//! Keeping replay draws off the action stream is what lets a replay loop
//! with no usable replays retrace the plain PPO loop bit for bit.

mod agent;
mod baselines;
mod dr3;
mod r3;
mod tracker;
mod weak_r3;

pub use agent::{collect_trajectory, random_initiator_action, Behavior, PpoAgent, RandomBehavior};
pub use baselines::{DdqnConfig, DdqnTrainer, PpoTrainer};
pub use dr3::Dr3Trainer;
pub use r3::{Phase, PhaseState, R3Trainer};
pub use tracker::{degenerate_check, DegenerateRule, SuccessTracker};
pub use weak_r3::WeakR3Trainer;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{make_env_with, Env, EnvKind, EnvOptions, EnvSpec};
use crate::nets::{AdamConfig, InputLayout, NetConfig, PolicyParams};
use crate::ppo::{LossBreakdown, PpoConfig, Trajectory};
use crate::replay::{Dr3Schedule, DEFAULT_SIGMA};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ppo,
    Ddqn,
    WeakR3,
    R3,
    Dr3,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppo => "ppo",
            Algorithm::Ddqn => "ddqn",
            Algorithm::WeakR3 => "weak_r3",
            Algorithm::R3 => "r3",
            Algorithm::Dr3 => "dr3",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppo" => Ok(Algorithm::Ppo),
            "ddqn" => Ok(Algorithm::Ddqn),
            "weak_r3" => Ok(Algorithm::WeakR3),
            "r3" => Ok(Algorithm::R3),
            "dr3" => Ok(Algorithm::Dr3),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Settings shared by all training loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    /// Environment-step budget.
    pub max_steps: usize,
    /// Optional episode cap, whichever comes first.
    pub max_episodes: Option<usize>,
    pub success_rate_window: usize,
    /// R3: success-rate cutoff. DR3: reward cutoff; `None` means half the
    /// environment's maximum total reward.
    pub degenerate_cutoff: Option<f64>,
    pub random_initiator: bool,
    pub sigma: f64,
    pub capacity_b: usize,
    pub capacity_b_large: usize,
    pub capacity_dr3: usize,
    pub dr3_schedule: Dr3Schedule,
    /// Gradient epochs per trajectory for the initiator and explorers.
    pub explorer_epochs: usize,
    pub smoothing_alpha: f64,
    pub log_wall_clock: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            max_steps: 300_000,
            max_episodes: None,
            success_rate_window: 20,
            degenerate_cutoff: None,
            random_initiator: false,
            sigma: DEFAULT_SIGMA,
            capacity_b: 10,
            capacity_b_large: 20,
            capacity_dr3: 20,
            dr3_schedule: Dr3Schedule::default(),
            explorer_epochs: 1,
            smoothing_alpha: 0.05,
            log_wall_clock: true,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.success_rate_window == 0 {
            return Err(Error::Config("success_rate_window must be at least 1".into()));
        }
        if !(self.smoothing_alpha > 0.0 && self.smoothing_alpha <= 1.0) {
            return Err(Error::Config(format!("smoothing_alpha {} not in (0,1]", self.smoothing_alpha)));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::Config(format!("sigma {} must be nonnegative", self.sigma)));
        }
        if self.explorer_epochs == 0 {
            return Err(Error::Config("explorer_epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Everything needed to start a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub algorithm: Algorithm,
    pub env: EnvKind,
    pub size: Option<usize>,
    pub env_options: EnvOptions,
    pub seed: u64,
    pub trainer: TrainerConfig,
    pub ppo: PpoConfig,
    pub adam: AdamConfig,
    pub ddqn: DdqnConfig,
    /// Defaults to the per-environment architecture.
    pub net: Option<NetConfig>,
}

impl RunSetup {
    pub fn new(algorithm: Algorithm, env: EnvKind, size: Option<usize>, seed: u64) -> RunSetup {
        RunSetup {
            algorithm,
            env,
            size,
            env_options: EnvOptions::default(),
            seed,
            trainer: TrainerConfig::default(),
            ppo: PpoConfig::default(),
            adam: AdamConfig::default(),
            ddqn: DdqnConfig::default(),
            net: None,
        }
    }

    pub fn net_config(&self) -> NetConfig {
        self.net.clone().unwrap_or_else(|| NetConfig::for_env(self.env))
    }
}

/// One episode's metrics row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub episode: usize,
    pub steps: usize,
    pub reward: f64,
    pub success: bool,
    pub smoothed: f64,
    pub phase: String,
    pub buf_b: usize,
    pub buf_blarge: usize,
    pub ms: u64,
    /// First-epoch diagnostics of the main agent's update on this episode.
    #[serde(skip)]
    pub diag: Option<LossBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent {
    pub episode: usize,
    pub from: String,
    pub to: String,
    pub buf_b: usize,
    pub buf_blarge: usize,
}

pub trait Trainer {
    fn run_episode(&mut self) -> Result<RunRecord>;
    fn context(&self) -> &RunContext;
    fn events(&self) -> &[PhaseEvent] {
        &[]
    }
}

pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub const ACTION_STREAM: u64 = 1;
pub const REPLAY_STREAM: u64 = 2;
pub const INIT_STREAM: u64 = 3;

/// Per-run environment, generators and bookkeeping shared by all loops.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub env: Env,
    pub spec: EnvSpec,
    pub action_rng: ChaCha8Rng,
    pub replay_rng: ChaCha8Rng,
    pub steps: usize,
    pub episodes: usize,
    smoothed: Option<f64>,
    alpha: f64,
    started: Instant,
    wall_clock: bool,
}

impl RunContext {
    pub fn new(setup: &RunSetup) -> Result<RunContext> {
        setup.trainer.validate()?;
        setup.ppo.validate()?;
        let env = make_env_with(setup.env, setup.size, setup.seed, setup.env_options)?;
        Ok(RunContext {
            spec: env.spec(),
            env,
            action_rng: rng_stream(setup.seed, ACTION_STREAM),
            replay_rng: rng_stream(setup.seed, REPLAY_STREAM),
            steps: 0,
            episodes: 0,
            smoothed: None,
            alpha: setup.trainer.smoothing_alpha,
            started: Instant::now(),
            wall_clock: setup.trainer.log_wall_clock,
        })
    }

    pub fn collect(&mut self, behavior: &dyn Behavior) -> Result<Trajectory> {
        let traj = collect_trajectory(&mut self.env, behavior, &mut self.action_rng, self.episodes)?;
        self.steps += traj.len();
        Ok(traj)
    }

    /// Closes the episode: updates the smoothed reward and emits its record.
    pub fn record(
        &mut self,
        reward: f64,
        success: bool,
        phase: &str,
        buffers: (usize, usize),
        diag: Option<LossBreakdown>,
    ) -> RunRecord {
        let smoothed = match self.smoothed {
            None => reward,
            Some(prev) => self.alpha * reward + (1.0 - self.alpha) * prev,
        };
        self.smoothed = Some(smoothed);
        let rec = RunRecord {
            episode: self.episodes,
            steps: self.steps,
            reward,
            success,
            smoothed,
            phase: phase.to_string(),
            buf_b: buffers.0,
            buf_blarge: buffers.1,
            ms: if self.wall_clock {
                self.started.elapsed().as_millis() as u64
            } else {
                0
            },
            diag,
        };
        self.episodes += 1;
        rec
    }

    pub fn done(&self, cfg: &TrainerConfig) -> bool {
        self.steps >= cfg.max_steps || cfg.max_episodes.is_some_and(|m| self.episodes >= m)
    }
}

/// Builds a policy network for the run's environment.
pub fn build_policy(
    setup: &RunSetup,
    spec: &EnvSpec,
    has_critic: bool,
    entropy_coef: f64,
    rng: &mut ChaCha8Rng,
) -> PolicyParams {
    let layout = InputLayout::for_env(setup.env, spec);
    PolicyParams::new(layout, spec.action_count, has_critic, entropy_coef, &setup.net_config(), rng)
}

pub fn build_trainer(setup: &RunSetup) -> Result<Box<dyn Trainer>> {
    Ok(match setup.algorithm {
        Algorithm::Ppo => Box::new(PpoTrainer::new(setup)?),
        Algorithm::Ddqn => Box::new(DdqnTrainer::new(setup)?),
        Algorithm::WeakR3 => Box::new(WeakR3Trainer::new(setup)?),
        Algorithm::R3 => Box::new(R3Trainer::new(setup)?),
        Algorithm::Dr3 => Box::new(Dr3Trainer::new(setup)?),
    })
}

/// Drives `trainer` until the step or episode budget runs out.
pub fn run_to_budget(trainer: &mut dyn Trainer, cfg: &TrainerConfig) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    while !trainer.context().done(cfg) {
        records.push(trainer.run_episode()?);
    }
    Ok(records)
}
