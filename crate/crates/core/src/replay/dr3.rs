//! Reward-statistics rules for dense-reward replay.

use rand::Rng;

use super::buffer::CyclicBuffer;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation; 0 for fewer than two samples.
pub fn population_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Every past episode's total reward.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardStats {
    pub all_rewards: Vec<f64>,
}

impl RewardStats {
    pub fn push(&mut self, reward: f64) {
        self.all_rewards.push(reward);
    }

    pub fn mean(&self) -> f64 {
        mean(&self.all_rewards)
    }

    pub fn std(&self) -> f64 {
        population_std(&self.all_rewards)
    }
}

/// Admission rule: `r_D ≥ mean(B)` for a nonempty buffer, otherwise
/// `r_D > mean(R) + std(R)`.
pub fn dr3_admit(reward: f64, buffer: &CyclicBuffer, stats: &RewardStats) -> bool {
    if buffer.is_empty() {
        reward > stats.mean() + stats.std()
    } else {
        reward >= mean(&buffer.rewards())
    }
}

/// Entries whose reward exceeds `r_D + std(B)`.
pub fn dr3_candidates(buffer: &CyclicBuffer, reward: f64) -> Vec<usize> {
    let rewards = buffer.rewards();
    let bar = reward + population_std(&rewards);
    rewards
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > bar)
        .map(|(i, _)| i)
        .collect()
}

/// Uniform choice among [`dr3_candidates`].
pub fn dr3_select<R: Rng + ?Sized>(buffer: &CyclicBuffer, reward: f64, rng: &mut R) -> Option<usize> {
    let candidates = dr3_candidates(buffer, reward);
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.gen_range(0..candidates.len())])
    }
}
