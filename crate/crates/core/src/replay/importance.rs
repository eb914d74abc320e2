//! Truncated importance weighting for replayed trajectories.

use crate::nets::{action_distribution, Optimizer, PolicyParams};
use crate::ppo::{advantages_for, optimize, PpoConfig, SurrogateObjective, SurrogateTerm, TrainStats, Trajectory};
use crate::{Error, Result};

/// Indices whose current-to-behavior probability ratio is below `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeepSet {
    pub indices: Vec<usize>,
    /// π_θ̂(a_i|s_i) / p_i for every step.
    pub ratios: Vec<f64>,
    /// π_θ̂(a_i|s_i) for every step.
    pub current_probs: Vec<f64>,
    pub sigma: f64,
}

impl KeepSet {
    pub fn fit(&self) -> f64 {
        if self.ratios.is_empty() {
            return 0.0;
        }
        self.indices.len() as f64 / self.ratios.len() as f64
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn keep_set_from_ratios(ratios: Vec<f64>, current_probs: Vec<f64>, sigma: f64) -> KeepSet {
    let indices = ratios
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < sigma)
        .map(|(i, _)| i)
        .collect();
    KeepSet {
        indices,
        ratios,
        current_probs,
        sigma,
    }
}

pub fn compute_keep_set(net: &PolicyParams, traj: &Trajectory, sigma: f64) -> Result<KeepSet> {
    let mut ratios = Vec::with_capacity(traj.len());
    let mut probs = Vec::with_capacity(traj.len());
    for t in &traj.transitions {
        let dist = action_distribution(&net.forward(&t.obs)?.logits);
        probs.push(dist[t.action]);
        ratios.push(dist[t.action] / t.behavior_prob);
    }
    Ok(keep_set_from_ratios(ratios, probs, sigma))
}

/// |S| / N under the current policy.
pub fn fit(net: &PolicyParams, traj: &Trajectory, sigma: f64) -> Result<f64> {
    Ok(compute_keep_set(net, traj, sigma)?.fit())
}

/// The replay objective frozen at θ̂ = `net`:
/// `(1/|S|) Σ_{i∈S} [ (π_θ̂/p_i) L^PPO_i − e H_i ]`.
///
/// The importance factor is a constant per index; only the clipped loss and
/// entropy carry gradient. No value regression is included.
pub fn replay_objective<'a>(
    net: &PolicyParams,
    traj: &'a Trajectory,
    sigma: f64,
    entropy_coef: f64,
    cfg: &PpoConfig,
) -> Result<(SurrogateObjective<'a>, KeepSet)> {
    let keep = compute_keep_set(net, traj, sigma)?;
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let adv = advantages_for(net, traj, cfg)?;
    let terms = keep
        .indices
        .iter()
        .map(|&i| SurrogateTerm {
            step: i,
            old_prob: keep.current_probs[i],
            advantage: adv.advantages[i],
            weight: keep.ratios[i],
            value_target: None,
        })
        .collect();
    let objective = SurrogateObjective {
        traj,
        terms,
        clip_epsilon: cfg.clip_epsilon,
        entropy_coef,
        value_loss_coef: 0.0,
    };
    Ok((objective, keep))
}

/// Value of the replay objective at θ = θ̂.
pub fn replay_loss(net: &PolicyParams, traj: &Trajectory, sigma: f64, entropy_coef: f64, cfg: &PpoConfig) -> Result<f64> {
    let (objective, _) = replay_objective(net, traj, sigma, entropy_coef, cfg)?;
    Ok(objective.evaluate(net)?.total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    /// Fit measured at θ̂, before any update.
    pub fit: f64,
    pub keep: KeepSet,
    /// `None` when the keep set was empty and nothing was trained.
    pub stats: Option<TrainStats>,
}

/// Trains `net` on a replayed trajectory with the truncated objective.
pub fn train_on_replay(
    net: &mut PolicyParams,
    opt: &mut Optimizer,
    traj: &Trajectory,
    sigma: f64,
    cfg: &PpoConfig,
) -> Result<ReplayOutcome> {
    let entropy_coef = net.entropy_coef;
    match replay_objective(net, traj, sigma, entropy_coef, cfg) {
        Ok((objective, keep)) => {
            let stats = optimize(net, opt, &objective, cfg.epochs_per_trajectory)?;
            Ok(ReplayOutcome {
                fit: keep.fit(),
                keep,
                stats: Some(stats),
            })
        }
        Err(Error::EmptyKeepSet) => {
            let keep = compute_keep_set(net, traj, sigma)?;
            Ok(ReplayOutcome {
                fit: keep.fit(),
                keep,
                stats: None,
            })
        }
        Err(e) => Err(e),
    }
}
