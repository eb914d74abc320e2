use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ppo::{AgentTag, StepRecord, Trajectory};
use crate::{Error, Result};

/// Per-entry fit threshold bookkeeping for DR3: `base + admission·a + usage·u`,
/// where `a` counts admissions after this entry and `u` its uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Dr3Schedule {
    pub base: f64,
    pub admission_increment: f64,
    pub usage_increment: f64,
}

impl Default for Dr3Schedule {
    fn default() -> Self {
        Dr3Schedule {
            base: 0.6,
            admission_increment: 0.02,
            usage_increment: 0.01,
        }
    }
}

impl Dr3Schedule {
    pub fn threshold(&self, admissions: usize, usages: usize) -> f64 {
        self.base + self.admission_increment * admissions as f64 + self.usage_increment * usages as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BufferEntry {
    pub trajectory: Trajectory,
    pub usage_count: usize,
    /// Admissions that happened while this entry was stored.
    pub admissions_survived: usize,
    /// Entry-specific ϑ (DR3). R3 derives ϑ from the buffer length instead.
    pub fit_threshold: f64,
}

impl BufferEntry {
    pub fn new(trajectory: Trajectory, fit_threshold: f64) -> BufferEntry {
        BufferEntry {
            trajectory,
            usage_count: 0,
            admissions_survived: 0,
            fit_threshold,
        }
    }

    pub fn total_reward(&self) -> f64 {
        self.trajectory.total_reward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdEvent {
    NewAdmission,
    EntryUsed(usize),
}

/// Fixed-capacity FIFO of trajectories. Inserting into a full buffer evicts
/// the oldest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicBuffer {
    entries: VecDeque<BufferEntry>,
    capacity: usize,
}

impl CyclicBuffer {
    pub fn new(capacity: usize) -> CyclicBuffer {
        CyclicBuffer {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&BufferEntry> {
        self.entries.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BufferEntry> {
        self.entries.iter()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.entries.iter().map(BufferEntry::total_reward).collect()
    }

    /// Appends `entry`, returning the evicted oldest entry on overflow.
    pub fn insert_entry(&mut self, entry: BufferEntry) -> Option<BufferEntry> {
        if self.capacity == 0 {
            return Some(entry);
        }
        let evicted = if self.entries.len() == self.capacity {
            self.entries.pop_front()
        } else {
            None
        };
        self.entries.push_back(entry);
        evicted
    }

    pub fn insert(&mut self, trajectory: Trajectory) -> Option<BufferEntry> {
        self.insert_entry(BufferEntry::new(trajectory, 0.0))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.entries.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok(rng.gen_range(0..self.entries.len()))
    }

    /// Removes an entry, keeping the others in order.
    pub fn drop(&mut self, index: usize) -> Result<BufferEntry> {
        let len = self.entries.len();
        self.entries.remove(index).ok_or(Error::IndexOutOfRange { index, len })
    }

    pub fn dr3_threshold_update(&mut self, event: ThresholdEvent, schedule: &Dr3Schedule) -> Result<()> {
        match event {
            ThresholdEvent::NewAdmission => {
                for e in &mut self.entries {
                    e.admissions_survived += 1;
                    e.fit_threshold = schedule.threshold(e.admissions_survived, e.usage_count);
                }
            }
            ThresholdEvent::EntryUsed(index) => {
                let len = self.entries.len();
                let e = self.entries.get_mut(index).ok_or(Error::IndexOutOfRange { index, len })?;
                e.usage_count += 1;
                e.fit_threshold = schedule.threshold(e.admissions_survived, e.usage_count);
            }
        }
        Ok(())
    }

    /// Bumps every stored threshold, then stores `trajectory` at the base threshold.
    pub fn admit_dr3(&mut self, trajectory: Trajectory, schedule: &Dr3Schedule) -> Option<BufferEntry> {
        self.dr3_threshold_update(ThresholdEvent::NewAdmission, schedule)
            .expect("admission events carry no index");
        self.insert_entry(BufferEntry::new(trajectory, schedule.threshold(0, 0)))
    }

    /// JSON-lines snapshot: one record per stored trajectory.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            let rec = SnapshotRecord {
                episode_index: e.trajectory.episode_index,
                source: e.trajectory.source,
                total_reward: e.trajectory.total_reward,
                success: e.trajectory.success,
                usage_count: e.usage_count,
                fit_threshold: e.fit_threshold,
                steps: e
                    .trajectory
                    .transitions
                    .iter()
                    .map(|t| StepRecord {
                        obs: t.obs.clone(),
                        action: t.action,
                        prob: t.behavior_prob,
                        reward: t.reward,
                        done: t.done,
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub episode_index: usize,
    pub source: AgentTag,
    pub total_reward: f64,
    pub success: bool,
    pub usage_count: usize,
    pub fit_threshold: f64,
    pub steps: Vec<StepRecord>,
}
