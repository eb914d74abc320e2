use super::trajectory::Trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageSet {
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    pub gamma: f64,
    pub lam: f64,
}

/// Generalized advantage estimation by reverse recursion.
///
/// `values` has one entry per step plus the bootstrap value of the state
/// after the last step. A `done` step does not bootstrap.
pub fn compute_gae(traj: &Trajectory, values: &[f64], gamma: f64, lam: f64) -> Result<AdvantageSet> {
    gae_from_parts(&traj.rewards(), &traj.dones(), values, gamma, lam)
}

pub fn gae_from_parts(rewards: &[f64], dones: &[bool], values: &[f64], gamma: f64, lam: f64) -> Result<AdvantageSet> {
    let n = rewards.len();
    if values.len() != n + 1 {
        return Err(Error::Length {
            expected: n + 1,
            got: values.len(),
        });
    }
    if dones.len() != n {
        return Err(Error::Length {
            expected: n,
            got: dones.len(),
        });
    }
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * live - values[t];
        running = delta + gamma * lam * live * running;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok(AdvantageSet {
        advantages,
        returns,
        gamma,
        lam,
    })
}

/// In-place standardization; a constant vector becomes all zeros.
pub fn normalize(values: &mut [f64]) {
    let n = values.len() as f64;
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for v in values.iter_mut() {
        *v = (*v - mean) / (std + 1e-8);
    }
}
