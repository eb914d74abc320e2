//! Double DQN target and update.

use crate::envs::Observation;
use crate::nets::{argmax, Optimizer, PolicyParams};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct DqnTransition {
    pub obs: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Observation,
    /// True terminal state; truncated steps still bootstrap.
    pub terminal: bool,
}

/// `y = r + γ (1 - done) Q_target(s', argmax_a Q(s', a))`.
pub fn ddqn_target(q: &PolicyParams, target: &PolicyParams, t: &DqnTransition, gamma: f64) -> Result<f64> {
    if t.terminal {
        return Ok(t.reward);
    }
    let online = q.forward(&t.next_obs)?.logits;
    let best = argmax(&online);
    let evaluated = target.forward(&t.next_obs)?.logits[best];
    Ok(t.reward + gamma * evaluated)
}

/// One squared-error step towards the double-DQN targets; returns the
/// mean squared error before the step.
pub fn ddqn_update(
    q: &mut PolicyParams,
    target: &PolicyParams,
    batch: &[&DqnTransition],
    gamma: f64,
    opt: &mut Optimizer,
) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let n = batch.len() as f64;
    let mut grads = q.zero_gradients();
    let mut loss = 0.0;
    let mut d_out = vec![0.0; q.output_len()];
    for t in batch {
        let y = ddqn_target(q, target, t, gamma)?;
        let tape = q.forward_tape(&t.obs)?;
        let err = tape.outputs()[t.action] - y;
        loss += err * err;
        d_out.iter_mut().for_each(|d| *d = 0.0);
        d_out[t.action] = 2.0 * err / n;
        q.backward(&tape, &d_out, &mut grads)?;
    }
    opt.step(q, &grads)?;
    Ok(loss / n)
}

/// Online and target Q-networks with a periodic hard sync.
#[derive(Debug, Clone)]
pub struct DdqnLearner {
    pub q: PolicyParams,
    pub target: PolicyParams,
    pub opt: Optimizer,
    pub gamma: f64,
    pub sync_every: usize,
    pub updates: usize,
}

impl DdqnLearner {
    pub fn new(q: PolicyParams, opt: Optimizer, gamma: f64, sync_every: usize) -> DdqnLearner {
        DdqnLearner {
            target: q.clone(),
            q,
            opt,
            gamma,
            sync_every: sync_every.max(1),
            updates: 0,
        }
    }

    pub fn update(&mut self, batch: &[&DqnTransition]) -> Result<f64> {
        let loss = ddqn_update(&mut self.q, &self.target, batch, self.gamma, &mut self.opt)?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.sync_every) {
            self.target = self.q.clone();
        }
        Ok(loss)
    }
}
