//! Benchmark environments.
//!
//! All environments are pure functions of `(kind, size, seed, actions)`: the
//! generator stream is owned by the environment and consumed only by layout
//! generation and resets.

mod cartpole;
mod grid;

pub use cartpole::{CartPole, CartPoleParams, CartPoleState};
pub use grid::{Cell, Direction, GridKind, GridState, GridWorld};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Flat feature vector handed to policies.
pub type Observation = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Crossing,
    DoorKey,
    CartPole,
}

impl EnvKind {
    pub fn is_gridworld(self) -> bool {
        !matches!(self, EnvKind::CartPole)
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Crossing => "crossing",
            EnvKind::DoorKey => "doorkey",
            EnvKind::CartPole => "cartpole",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "crossing" => Ok(EnvKind::Crossing),
            "doorkey" => Ok(EnvKind::DoorKey),
            "cartpole" => Ok(EnvKind::CartPole),
            other => Err(Error::UnknownEnv(other.to_string())),
        }
    }
}

/// Static facts about an environment instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub action_count: usize,
    pub max_steps: usize,
    /// Theoretical maximum total reward of one episode.
    pub max_total_reward: f64,
    pub obs_length: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    /// Terminal or truncated.
    pub done: bool,
    /// `done` because of the step limit rather than a terminal state.
    pub truncated: bool,
    /// Goal reached (gridworlds only).
    pub success: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvOptions {
    /// Draw a fresh gridworld layout on every reset instead of reusing the
    /// layout generated from the run seed.
    pub randomize_each_episode: bool,
    /// Override the default step limit.
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Env {
    Grid(GridWorld),
    CartPole(CartPole),
}

pub const GRID_SIZES: std::ops::RangeInclusive<usize> = 5..=9;

/// Builds an environment with default options.
pub fn make_env(kind: EnvKind, size: Option<usize>, seed: u64) -> Result<Env> {
    make_env_with(kind, size, seed, EnvOptions::default())
}

pub fn make_env_with(
    kind: EnvKind,
    size: Option<usize>,
    seed: u64,
    options: EnvOptions,
) -> Result<Env> {
    match kind {
        EnvKind::CartPole => Ok(Env::CartPole(CartPole::new(seed, options))),
        EnvKind::Crossing | EnvKind::DoorKey => {
            let size = size.ok_or(Error::InvalidSize(-1))?;
            if !GRID_SIZES.contains(&size) {
                return Err(Error::InvalidSize(size as i64));
            }
            let grid_kind = if kind == EnvKind::Crossing {
                GridKind::Crossing
            } else {
                GridKind::DoorKey
            };
            Ok(Env::Grid(GridWorld::new(grid_kind, size, seed, options)))
        }
    }
}

impl Env {
    pub fn kind(&self) -> EnvKind {
        match self {
            Env::Grid(g) => match g.kind() {
                GridKind::Crossing => EnvKind::Crossing,
                GridKind::DoorKey => EnvKind::DoorKey,
            },
            Env::CartPole(_) => EnvKind::CartPole,
        }
    }

    pub fn spec(&self) -> EnvSpec {
        match self {
            Env::Grid(g) => g.spec(),
            Env::CartPole(c) => c.spec(),
        }
    }

    pub fn reset(&mut self) -> Observation {
        match self {
            Env::Grid(g) => g.reset(),
            Env::CartPole(c) => c.reset(),
        }
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        match self {
            Env::Grid(g) => g.step(action),
            Env::CartPole(c) => c.step(action),
        }
    }

    pub fn observe(&self) -> Observation {
        match self {
            Env::Grid(g) => g.state().encode(),
            Env::CartPole(c) => c.state().encode(),
        }
    }

    pub fn render_ascii(&self) -> String {
        match self {
            Env::Grid(g) => g.state().render_ascii(),
            Env::CartPole(c) => format!("{:?}", c.state()),
        }
    }
}
