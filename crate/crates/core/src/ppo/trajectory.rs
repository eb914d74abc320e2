use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::envs::Observation;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Observation,
    pub action: usize,
    /// Probability the collecting policy assigned to `action`.
    pub behavior_prob: f64,
    pub reward: f64,
    pub done: bool,
}

/// Which agent collected a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentTag {
    Ppo,
    Initiator,
    RandomInitiator,
    Explorer1,
    Explorer2,
    Exploiter,
    Dqn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    pub total_reward: f64,
    pub success: bool,
    pub source: AgentTag,
    pub episode_index: usize,
}

/// One line of a trajectory dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub obs: Observation,
    pub action: usize,
    pub prob: f64,
    pub reward: f64,
    pub done: bool,
}

impl Trajectory {
    pub fn new(transitions: Vec<Transition>, success: bool, source: AgentTag, episode_index: usize) -> Trajectory {
        let total_reward = transitions.iter().map(|t| t.reward).sum();
        Trajectory {
            transitions,
            total_reward,
            success,
            source,
            episode_index,
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.reward).collect()
    }

    pub fn dones(&self) -> Vec<bool> {
        self.transitions.iter().map(|t| t.done).collect()
    }

    /// Writes one JSON object per step: `{obs, action, prob, reward, done}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.transitions {
            let rec = StepRecord {
                obs: t.obs.clone(),
                action: t.action,
                prob: t.behavior_prob,
                reward: t.reward,
                done: t.done,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn read_step_records<R: BufRead>(input: R) -> Result<Vec<StepRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
