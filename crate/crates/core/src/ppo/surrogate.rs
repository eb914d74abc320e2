//! The clipped surrogate objective and the trajectory training step.

use serde::{Deserialize, Serialize};

use super::gae::{compute_gae, normalize, AdvantageSet};
use super::trajectory::Trajectory;
use crate::nets::{
    action_distribution, entropy, entropy_grad_logits, prob_grad_logits, Gradients, Optimizer, PolicyParams,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub gamma: f64,
    pub lam: f64,
    pub value_loss_coef: f64,
    pub epochs_per_trajectory: usize,
    pub advantage_normalization: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip_epsilon: 0.2,
            entropy_coef: 0.01,
            gamma: 0.99,
            lam: 0.95,
            value_loss_coef: 0.5,
            epochs_per_trajectory: 4,
            advantage_normalization: false,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err(Error::Config(format!("clip_epsilon {} not in (0,1)", self.clip_epsilon)));
        }
        for (name, v) in [("gamma", self.gamma), ("lam", self.lam)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} {v} not in (0,1]")));
            }
        }
        if self.epochs_per_trajectory == 0 {
            return Err(Error::Config("epochs_per_trajectory must be positive".into()));
        }
        Ok(())
    }

    pub fn with_epochs(mut self, epochs: usize) -> PpoConfig {
        self.epochs_per_trajectory = epochs;
        self
    }
}

/// `-min(ρÂ, clip(ρ, 1-ε, 1+ε)Â)` with `ρ = new_prob / old_prob`.
pub fn ppo_clip_loss(new_prob: f64, old_prob: f64, advantage: f64, clip_epsilon: f64) -> f64 {
    let ratio = new_prob / old_prob;
    let clipped = ratio.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon);
    -(ratio * advantage).min(clipped * advantage)
}

/// d loss / d ratio. Zero where the clipped branch is the active minimum.
fn ppo_clip_loss_dratio(ratio: f64, advantage: f64, clip_epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon);
    if ratio * advantage <= clipped * advantage {
        -advantage
    } else {
        0.0
    }
}

/// Advantages for `traj` under `net`: GAE on the net's own critic, or
/// discounted reward-to-go for critic-free nets.
pub fn advantages_for(net: &PolicyParams, traj: &Trajectory, cfg: &PpoConfig) -> Result<AdvantageSet> {
    let values = if net.has_critic {
        let mut values = Vec::with_capacity(traj.len());
        for t in &traj.transitions {
            values.push(net.forward(&t.obs)?.value.expect("critic output"));
        }
        Some(values)
    } else {
        None
    };
    advantages_from_values(traj, values, cfg)
}

/// `values` holds the critic's estimate per step, `None` for critic-free nets.
fn advantages_from_values(traj: &Trajectory, values: Option<Vec<f64>>, cfg: &PpoConfig) -> Result<AdvantageSet> {
    let mut set = match values {
        Some(mut values) => {
            values.push(0.0);
            compute_gae(traj, &values, cfg.gamma, cfg.lam)?
        }
        None => compute_gae(traj, &vec![0.0; traj.len() + 1], cfg.gamma, 1.0)?,
    };
    if cfg.advantage_normalization {
        normalize(&mut set.advantages);
    }
    Ok(set)
}

/// Everything about one summand that stays fixed while θ moves.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTerm {
    /// Index into the trajectory.
    pub step: usize,
    /// π_θ̂(a|s) at the start of the update.
    pub old_prob: f64,
    pub advantage: f64,
    /// Constant multiplier on the clipped loss (1 for plain PPO).
    pub weight: f64,
    /// Regression target for the value output, when trained.
    pub value_target: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossBreakdown {
    pub total: f64,
    /// Mean weighted clipped loss.
    pub policy: f64,
    /// Mean entropy.
    pub entropy: f64,
    pub value_loss: f64,
    pub mean_ratio: f64,
    pub clip_fraction: f64,
}

/// `mean_i w_i L_i + c_v mean (v_i - R_i)^2 - e mean H_i` over a frozen term set.
#[derive(Debug, Clone)]
pub struct SurrogateObjective<'a> {
    pub traj: &'a Trajectory,
    pub terms: Vec<SurrogateTerm>,
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub value_loss_coef: f64,
}

impl<'a> SurrogateObjective<'a> {
    /// Plain PPO objective with θ̂ = `net`.
    pub fn ppo(net: &PolicyParams, traj: &'a Trajectory, cfg: &PpoConfig) -> Result<SurrogateObjective<'a>> {
        let mut old_probs = Vec::with_capacity(traj.len());
        let mut values = Vec::with_capacity(traj.len());
        for t in &traj.transitions {
            let out = net.forward(&t.obs)?;
            old_probs.push(action_distribution(&out.logits)[t.action]);
            values.extend(out.value);
        }
        let adv = advantages_from_values(traj, net.has_critic.then_some(values), cfg)?;
        let terms = old_probs
            .into_iter()
            .enumerate()
            .map(|(i, old_prob)| SurrogateTerm {
                step: i,
                old_prob,
                advantage: adv.advantages[i],
                weight: 1.0,
                value_target: net.has_critic.then(|| adv.returns[i]),
            })
            .collect();
        Ok(SurrogateObjective {
            traj,
            terms,
            clip_epsilon: cfg.clip_epsilon,
            entropy_coef: net.entropy_coef,
            value_loss_coef: cfg.value_loss_coef,
        })
    }

    pub fn evaluate(&self, net: &PolicyParams) -> Result<LossBreakdown> {
        self.run(net, None)
    }

    pub fn gradient(&self, net: &PolicyParams) -> Result<(LossBreakdown, Gradients)> {
        let mut grads = net.zero_gradients();
        let loss = self.run(net, Some(&mut grads))?;
        Ok((loss, grads))
    }

    fn run(&self, net: &PolicyParams, mut grads: Option<&mut Gradients>) -> Result<LossBreakdown> {
        if self.terms.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let n = self.terms.len() as f64;
        let value_n = self.terms.iter().filter(|t| t.value_target.is_some()).count().max(1) as f64;
        let mut acc = LossBreakdown::default();
        let mut d_out = vec![0.0; net.output_len()];
        for term in &self.terms {
            let tr = &self.traj.transitions[term.step];
            let tape = net.forward_tape(&tr.obs)?;
            let out = tape.outputs();
            let dist = action_distribution(&out[..net.action_count]);
            let ratio = dist[tr.action] / term.old_prob;
            let h = entropy(&dist);
            acc.policy += term.weight * ppo_clip_loss(dist[tr.action], term.old_prob, term.advantage, self.clip_epsilon);
            acc.entropy += h;
            acc.mean_ratio += ratio;
            if (ratio - 1.0).abs() > self.clip_epsilon {
                acc.clip_fraction += 1.0;
            }
            let value_err = match (term.value_target, net.has_critic) {
                (Some(target), true) => Some(out[net.action_count] - target),
                _ => None,
            };
            if let Some(err) = value_err {
                acc.value_loss += err * err;
            }
            if let Some(g) = grads.as_deref_mut() {
                d_out.iter_mut().for_each(|d| *d = 0.0);
                let d_ratio = term.weight * ppo_clip_loss_dratio(ratio, term.advantage, self.clip_epsilon) / n;
                if d_ratio != 0.0 {
                    let dp = prob_grad_logits(&dist, tr.action);
                    for (d, p) in d_out.iter_mut().zip(dp) {
                        *d += d_ratio * p / term.old_prob;
                    }
                }
                if self.entropy_coef != 0.0 {
                    for (d, dh) in d_out.iter_mut().zip(entropy_grad_logits(&dist)) {
                        *d -= self.entropy_coef * dh / n;
                    }
                }
                if let Some(err) = value_err {
                    d_out[net.action_count] += self.value_loss_coef * 2.0 * err / value_n;
                }
                net.backward(&tape, &d_out, g)?;
            }
        }
        acc.policy /= n;
        acc.entropy /= n;
        acc.mean_ratio /= n;
        acc.clip_fraction /= n;
        acc.value_loss /= value_n;
        acc.total = acc.policy + self.value_loss_coef * acc.value_loss - self.entropy_coef * acc.entropy;
        if !acc.total.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        Ok(acc)
    }
}

/// Per-epoch diagnostics, each measured before that epoch's parameter step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainStats {
    pub epochs: Vec<LossBreakdown>,
}

impl TrainStats {
    pub fn first(&self) -> Option<&LossBreakdown> {
        self.epochs.first()
    }
}

/// Runs `epochs` gradient steps of `objective`, starting from `net`.
pub fn optimize(
    net: &mut PolicyParams,
    opt: &mut Optimizer,
    objective: &SurrogateObjective<'_>,
    epochs: usize,
) -> Result<TrainStats> {
    let mut stats = TrainStats::default();
    for _ in 0..epochs {
        let (loss, grads) = objective.gradient(net)?;
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        opt.step(net, &grads)?;
        stats.epochs.push(loss);
    }
    Ok(stats)
}

/// PPO update on one trajectory; θ̂ is `net` as passed in.
pub fn train_on_trajectory(
    net: &mut PolicyParams,
    opt: &mut Optimizer,
    traj: &Trajectory,
    cfg: &PpoConfig,
) -> Result<TrainStats> {
    if traj.is_empty() {
        return Ok(TrainStats::default());
    }
    let objective = SurrogateObjective::ppo(net, traj, cfg)?;
    optimize(net, opt, &objective, cfg.epochs_per_trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ratio_gives_negative_advantage() {
        for a in [-2.0, 0.0, 0.3, 5.0] {
            assert_eq!(ppo_clip_loss(0.4, 0.4, a, 0.2), -a);
        }
    }

    #[test]
    fn worked_example() {
        // ρ = 1.5, Â = 2, ε = 0.2: -min(3.0, 1.2 * 2) = -2.4
        let loss = ppo_clip_loss(0.75, 0.5, 2.0, 0.2);
        assert!((loss + 2.4).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(PpoConfig::default().validate().is_ok());
        let bad = PpoConfig {
            clip_epsilon: 1.0,
            ..PpoConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PpoConfig {
            gamma: 0.0,
            ..PpoConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
