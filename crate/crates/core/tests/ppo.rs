mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use r3_core::nets::{Activation, Dense, InputLayout, Optimizer, PolicyParams};
use r3_core::ppo::{
    gae_from_parts, ppo_clip_loss, train_on_trajectory, AgentTag, PpoConfig, SurrogateObjective, Trajectory,
    Transition,
};
use r3_core::replay::{compute_keep_set, replay_objective};
use r3_core::Error;

use common::{clip_loss_oracle, gae_oracle, random_net, random_trajectory, shannon, softmax};

/// Linear two-input, three-action policy with hand-set weights.
fn linear_net(weights: [f64; 6], bias: [f64; 3], entropy_coef: f64) -> PolicyParams {
    let mut head = Dense::zeros(2, 3, Activation::Identity);
    head.weights = weights.to_vec();
    head.bias = bias.to_vec();
    PolicyParams {
        layout: InputLayout::flat(2),
        convs: vec![],
        dense: vec![head],
        action_count: 3,
        has_critic: false,
        entropy_coef,
    }
}

fn logits_by_hand(w: &[f64; 6], b: &[f64; 3], x: [f64; 2]) -> Vec<f64> {
    (0..3).map(|o| w[2 * o] * x[0] + w[2 * o + 1] * x[1] + b[o]).collect()
}

const W: [f64; 6] = [0.5, -0.2, 0.1, 0.3, -0.4, 0.0];
const B: [f64; 3] = [0.0, 0.1, -0.1];
const OBS: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]];
const ACTIONS: [usize; 3] = [0, 2, 1];
const REWARDS: [f64; 3] = [0.0, 0.0, 1.0];

fn fixture(behavior: [f64; 3]) -> Trajectory {
    let transitions = (0..3)
        .map(|t| Transition {
            obs: OBS[t].to_vec(),
            action: ACTIONS[t],
            behavior_prob: behavior[t],
            reward: REWARDS[t],
            done: t == 2,
        })
        .collect();
    Trajectory::new(transitions, true, AgentTag::Ppo, 0)
}

#[test]
fn three_step_fixture_matches_hand_composition() {
    let e = 0.01;
    let cfg = PpoConfig::default();
    let old = linear_net(W, B, e);
    let probs: Vec<Vec<f64>> = OBS.iter().map(|&x| softmax(&logits_by_hand(&W, &B, x))).collect();
    let traj = fixture([probs[0][0], probs[1][2], probs[2][1]]);
    // Critic-free: advantages are discounted reward-to-go.
    let g = cfg.gamma;
    let adv = [g * g, g, 1.0];

    let objective = SurrogateObjective::ppo(&old, &traj, &cfg).unwrap();
    let at_old = objective.evaluate(&old).unwrap();
    let want_policy = (0..3)
        .map(|t| ppo_clip_loss(probs[t][ACTIONS[t]], probs[t][ACTIONS[t]], adv[t], 0.2))
        .sum::<f64>()
        / 3.0;
    let want_entropy = probs.iter().map(|p| shannon(p)).sum::<f64>() / 3.0;
    assert!((at_old.total - (want_policy - e * want_entropy)).abs() < 1e-12);
    assert!((at_old.policy + (adv.iter().sum::<f64>() / 3.0)).abs() < 1e-12);
    assert_eq!(at_old.mean_ratio, 1.0);
    assert_eq!(at_old.clip_fraction, 0.0);

    // Moved parameters: ratios leave the trust region on some steps.
    let w2 = [1.5, -0.2, 0.1, 0.3, -0.4, 0.9];
    let new = linear_net(w2, B, e);
    let at_new = objective.evaluate(&new).unwrap();
    let new_probs: Vec<Vec<f64>> = OBS.iter().map(|&x| softmax(&logits_by_hand(&w2, &B, x))).collect();
    let mut policy = 0.0;
    let mut clipped = 0.0;
    for t in 0..3 {
        let ratio = new_probs[t][ACTIONS[t]] / probs[t][ACTIONS[t]];
        policy += clip_loss_oracle(ratio, adv[t], 0.2);
        if (ratio - 1.0).abs() > 0.2 {
            clipped += 1.0;
        }
    }
    let entropy = new_probs.iter().map(|p| shannon(p)).sum::<f64>() / 3.0;
    assert!((at_new.total - (policy / 3.0 - e * entropy)).abs() < 1e-12);
    assert!((at_new.clip_fraction - clipped / 3.0).abs() < 1e-15);
    assert!(clipped > 0.0);
}

#[test]
fn replay_fixture_matches_hand_composition() {
    let e = 0.03;
    let sigma = 2.0;
    let cfg = PpoConfig::default();
    let net = linear_net(W, B, e);
    let probs: Vec<Vec<f64>> = OBS.iter().map(|&x| softmax(&logits_by_hand(&W, &B, x))).collect();
    let current: Vec<f64> = (0..3).map(|t| probs[t][ACTIONS[t]]).collect();
    // Step 1's behavior probability is small enough to push its ratio past σ.
    let behavior = [0.5, current[1] / 3.0, 0.9];
    let traj = fixture(behavior);
    let g = cfg.gamma;
    let adv = [g * g, g, 1.0];

    let keep = compute_keep_set(&net, &traj, sigma).unwrap();
    assert_eq!(keep.indices, vec![0, 2]);
    assert!((keep.fit() - 2.0 / 3.0).abs() < 1e-15);

    let (objective, _) = replay_objective(&net, &traj, sigma, e, &cfg).unwrap();
    let loss = objective.evaluate(&net).unwrap().total;
    let want = [0usize, 2]
        .iter()
        .map(|&t| {
            let w = current[t] / behavior[t];
            w * clip_loss_oracle(1.0, adv[t], 0.2) - e * shannon(&probs[t])
        })
        .sum::<f64>()
        / 2.0;
    assert!((loss - want).abs() < 1e-12);

    let none = replay_objective(&net, &traj, 0.0, e, &cfg);
    assert!(matches!(none, Err(Error::EmptyKeepSet)));
}

#[test]
fn gae_matches_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let n = rng.gen_range(1..=8);
        let rewards: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dones: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
        let values: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (gamma, lam) = (rng.gen_range(0.5..1.0), rng.gen_range(0.0..=1.0));
        let got = gae_from_parts(&rewards, &dones, &values, gamma, lam).unwrap();
        let want = gae_oracle(&rewards, &dones, &values, gamma, lam);
        for t in 0..n {
            assert!((got.advantages[t] - want[t]).abs() < 1e-10);
            assert!((got.returns[t] - want[t] - values[t]).abs() < 1e-10);
        }
    }
    assert!(gae_from_parts(&[1.0], &[true], &[0.0], 0.9, 0.9).is_err());
}

#[test]
fn clip_loss_enumeration() {
    for eps in [0.1, 0.2, 0.3] {
        for i in 0..=60 {
            let ratio = i as f64 * 0.05;
            for adv in [-2.0, -0.5, 0.0, 0.5, 2.0] {
                assert_eq!(ppo_clip_loss(ratio, 1.0, adv, eps), clip_loss_oracle(ratio, adv, eps));
            }
        }
        // Flat beyond the trust region on the side the sign of Â selects.
        assert_eq!(ppo_clip_loss(1.0 + eps + 0.3, 1.0, 1.0, eps), ppo_clip_loss(1.0 + eps, 1.0, 1.0, eps));
        assert_eq!(ppo_clip_loss(1.0 - eps - 0.3, 1.0, -1.0, eps), ppo_clip_loss(1.0 - eps, 1.0, -1.0, eps));
    }
}

#[test]
fn first_epoch_on_fresh_data_is_unclipped() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let critic = rng.gen_bool(0.5);
        let mut net = random_net(&mut rng, critic);
        let traj = random_trajectory(&net, 6, &mut rng);
        let mut opt = Optimizer::adam(&net, Default::default());
        let stats = train_on_trajectory(&mut net, &mut opt, &traj, &PpoConfig::default()).unwrap();
        assert_eq!(stats.epochs.len(), 4);
        let first = stats.first().unwrap();
        assert_eq!(first.clip_fraction, 0.0);
        assert!((first.mean_ratio - 1.0).abs() < 1e-15);
    }
}

#[test]
fn training_raises_probability_of_rewarded_action() {
    let net0 = linear_net([0.0; 6], [0.0; 3], 0.0);
    let obs = vec![1.0, 0.5];
    let traj = Trajectory::new(
        vec![Transition {
            obs: obs.clone(),
            action: 1,
            behavior_prob: 1.0 / 3.0,
            reward: 1.0,
            done: true,
        }],
        true,
        AgentTag::Ppo,
        0,
    );
    let mut net = net0.clone();
    let mut opt = Optimizer::Sgd { lr: 0.05 };
    let cfg = PpoConfig {
        epochs_per_trajectory: 20,
        ..PpoConfig::default()
    };
    let stats = train_on_trajectory(&mut net, &mut opt, &traj, &cfg).unwrap();
    let p = softmax(&net.forward(&obs).unwrap().logits);
    // Clipping stops the climb once ρ passes 1 + ε.
    assert!(p[1] > 1.0 / 3.0 * 1.2 - 1e-9, "{p:?}");
    assert!(p[1] < 1.0 / 3.0 * 1.2 + 0.02);
    assert!(stats.epochs.last().unwrap().clip_fraction > 0.0);
}
