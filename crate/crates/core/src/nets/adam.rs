use serde::{Deserialize, Serialize};

use super::policy::{Gradients, PolicyParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
    pub steps: u64,
}

impl AdamState {
    pub fn new(net: &PolicyParams, config: AdamConfig) -> AdamState {
        let zeros: Vec<Vec<f64>> = net.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            config,
            first: zeros.clone(),
            second: zeros,
            steps: 0,
        }
    }
}

fn check_congruent(net: &PolicyParams, grads: &Gradients) -> Result<()> {
    let tensors = net.tensors();
    if tensors.len() != grads.tensors.len()
        || tensors.iter().zip(&grads.tensors).any(|(p, g)| p.len() != g.len())
    {
        return Err(Error::Shape("gradients do not match network".into()));
    }
    Ok(())
}

/// Bias-corrected adaptive-moment update.
pub fn adam_step(net: &mut PolicyParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    check_congruent(net, grads)?;
    if state.first.len() != grads.tensors.len()
        || state.first.iter().zip(&grads.tensors).any(|(m, g)| m.len() != g.len())
    {
        return Err(Error::Shape("optimizer state does not match network".into()));
    }
    state.steps += 1;
    let AdamConfig { lr, beta1, beta2, eps } = state.config;
    let t = state.steps as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (k, param) in net.tensors_mut().into_iter().enumerate() {
        let g = &grads.tensors[k];
        let m = &mut state.first[k];
        let v = &mut state.second[k];
        for i in 0..param.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            param[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// Plain gradient descent.
pub fn sgd_step(net: &mut PolicyParams, grads: &Gradients, lr: f64) -> Result<()> {
    check_congruent(net, grads)?;
    for (param, g) in net.tensors_mut().into_iter().zip(&grads.tensors) {
        param.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Sgd { lr: f64 },
    Adam(AdamState),
}

impl Optimizer {
    pub fn adam(net: &PolicyParams, config: AdamConfig) -> Optimizer {
        Optimizer::Adam(AdamState::new(net, config))
    }

    pub fn step(&mut self, net: &mut PolicyParams, grads: &Gradients) -> Result<()> {
        match self {
            Optimizer::Sgd { lr } => sgd_step(net, grads, *lr),
            Optimizer::Adam(state) => adam_step(net, grads, state),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{InputLayout, NetConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> PolicyParams {
        PolicyParams::new(
            InputLayout::flat(3),
            2,
            true,
            0.0,
            &NetConfig { hidden: vec![4], ..NetConfig::cartpole() },
            &mut ChaCha8Rng::seed_from_u64(1),
        )
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut n = net();
        let before = n.clone();
        let mut st = AdamState::new(&n, AdamConfig::default());
        let zero = n.zero_gradients();
        adam_step(&mut n, &zero, &mut st).unwrap();
        assert_eq!(n, before);
        assert_eq!(st.steps, 1);
    }

    #[test]
    fn first_step_is_normalized() {
        let mut n = net();
        let before = n.clone();
        let cfg = AdamConfig::default();
        let mut st = AdamState::new(&n, cfg);
        let mut g = n.zero_gradients();
        g.tensors[0][0] = 0.37;
        g.tensors[1][1] = -2.5;
        adam_step(&mut n, &g, &mut st).unwrap();
        let moved0 = n.dense[0].weights[0] - before.dense[0].weights[0];
        let moved1 = n.dense[0].bias[1] - before.dense[0].bias[1];
        assert!((moved0 - (-cfg.lr * 0.37 / (0.37 + cfg.eps))).abs() < 1e-15);
        assert!((moved1 - (cfg.lr * 2.5 / (2.5 + cfg.eps))).abs() < 1e-15);
    }

    #[test]
    fn mismatched_gradients_rejected() {
        let mut n = net();
        let mut st = AdamState::new(&n, AdamConfig::default());
        let g = Gradients { tensors: vec![vec![0.0; 2]] };
        assert!(matches!(adam_step(&mut n, &g, &mut st), Err(Error::Shape(_))));
    }
}
