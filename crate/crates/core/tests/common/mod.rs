//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use r3_core::nets::{Activation, InputLayout, NetConfig, PolicyParams};
use r3_core::ppo::{AgentTag, Trajectory, Transition};

/// Textbook piecewise form of the clipped loss, written out branch by branch.
pub fn clip_loss_oracle(ratio: f64, adv: f64, eps: f64) -> f64 {
    let clipped = if ratio < 1.0 - eps {
        1.0 - eps
    } else if ratio > 1.0 + eps {
        1.0 + eps
    } else {
        ratio
    };
    let a = ratio * adv;
    let b = clipped * adv;
    if a < b {
        -a
    } else {
        -b
    }
}

/// `A_t = Σ_l (γλ)^l δ_{t+l}`, summed explicitly and cut at episode ends.
pub fn gae_oracle(rewards: &[f64], dones: &[bool], values: &[f64], gamma: f64, lam: f64) -> Vec<f64> {
    let n = rewards.len();
    let delta = |k: usize| {
        let next = if dones[k] { 0.0 } else { values[k + 1] };
        rewards[k] + gamma * next - values[k]
    };
    (0..n)
        .map(|t| {
            let mut total = 0.0;
            for k in t..n {
                let mut weight = 1.0;
                for _ in t..k {
                    weight *= gamma * lam;
                }
                total += weight * delta(k);
                if dones[k] {
                    break;
                }
            }
            total
        })
        .collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

fn activation(rng: &mut ChaCha8Rng) -> Activation {
    [Activation::Identity, Activation::Tanh, Activation::Relu][rng.gen_range(0..3)]
}

/// A random architecture covering dense-only and conv+dense nets.
pub fn random_net(rng: &mut ChaCha8Rng, has_critic: bool) -> PolicyParams {
    let with_image = rng.gen_bool(0.6);
    let layout = if with_image {
        let (h, w, c) = (rng.gen_range(3..6), rng.gen_range(3..6), rng.gen_range(1..4));
        InputLayout {
            flat: rng.gen_range(0..4),
            image: Some((h, w, c)),
            image_scale: rng.gen_range(0.1..1.0),
        }
    } else {
        InputLayout::flat(rng.gen_range(1..7))
    };
    let cfg = NetConfig {
        conv_channels: if with_image {
            (0..rng.gen_range(1..3)).map(|_| rng.gen_range(1..4)).collect()
        } else {
            vec![]
        },
        kernel: if with_image { rng.gen_range(1..3) } else { 2 },
        conv_activation: activation(rng),
        hidden: (0..rng.gen_range(0..3)).map(|_| rng.gen_range(2..7)).collect(),
        hidden_activation: activation(rng),
    };
    let actions = rng.gen_range(2..5);
    let mut net = PolicyParams::new(layout, actions, has_critic, 0.0, &cfg, rng);
    // Larger-than-default head weights so logits are not all ~0, and nonzero
    // biases so no ReLU input sits exactly on its kink.
    for w in net.dense.last_mut().unwrap().weights.iter_mut() {
        *w *= 50.0;
    }
    for b in net.dense.iter_mut().map(|d| &mut d.bias).chain(net.convs.iter_mut().map(|c| &mut c.bias)) {
        b.iter_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
    }
    net
}

pub fn random_obs(net: &PolicyParams, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..net.layout.obs_length()).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// A trajectory of random observations with behavior probabilities taken
/// from `net` and rewards drawn at random.
pub fn random_trajectory(net: &PolicyParams, len: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let mut transitions = Vec::with_capacity(len);
    for t in 0..len {
        let obs = random_obs(net, rng);
        let p = softmax(&net.forward(&obs).unwrap().logits);
        let action = rng.gen_range(0..net.action_count);
        transitions.push(Transition {
            obs,
            action,
            behavior_prob: p[action],
            reward: if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 },
            done: t + 1 == len,
        });
    }
    Trajectory::new(transitions, false, AgentTag::Ppo, 0)
}

/// Largest `|a - n| / max(|a|, |n|, floor)` over all parameters, where `n` is
/// the central difference of `loss` with step `h`.
pub fn max_relative_error(
    net: &PolicyParams,
    analytic: &[f64],
    loss: impl Fn(&PolicyParams) -> f64,
    h: f64,
    floor: f64,
) -> f64 {
    let mut worst = 0.0f64;
    let mut flat_index = 0;
    let tensor_count = net.tensors().len();
    for ti in 0..tensor_count {
        let len = net.tensors()[ti].len();
        for j in 0..len {
            let mut plus = net.clone();
            plus.tensors_mut()[ti][j] += h;
            let mut minus = net.clone();
            minus.tensors_mut()[ti][j] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let a = analytic[flat_index];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            if err > 1e-4 && std::env::var("GRADCHECK_DEBUG").is_ok() {
                eprintln!("tensor {ti} idx {j}: analytic {a} numeric {numeric}");
            }
            worst = worst.max(err);
            flat_index += 1;
        }
    }
    worst
}
