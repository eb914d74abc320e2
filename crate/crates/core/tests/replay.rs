mod common;

use std::collections::VecDeque;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use r3_core::nets::Optimizer;
use r3_core::ppo::{AgentTag, PpoConfig, Trajectory, Transition};
use r3_core::replay::{
    compute_keep_set, dr3_admit, dr3_candidates, keep_set_from_ratios, r3_fit_threshold, train_on_replay,
    CyclicBuffer, Dr3Schedule, RewardStats, ThresholdEvent,
};

use common::{random_net, random_trajectory};

fn tagged(reward: f64, id: usize) -> Trajectory {
    Trajectory::new(
        vec![Transition {
            obs: vec![0.0],
            action: 0,
            behavior_prob: 1.0,
            reward,
            done: true,
        }],
        reward > 0.0,
        AgentTag::Ppo,
        id,
    )
}

#[derive(Debug, Clone)]
enum Op {
    Insert,
    Drop(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![3 => Just(Op::Insert), 1 => (0usize..12).prop_map(Op::Drop)]
}

proptest! {
    #[test]
    fn keep_sets_grow_with_sigma(
        ratios in prop::collection::vec(0.0f64..5.0, 1..30),
        s1 in 0.0f64..5.0,
        s2 in 0.0f64..5.0,
    ) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let probs = vec![0.5; ratios.len()];
        let a = keep_set_from_ratios(ratios.clone(), probs.clone(), lo);
        let b = keep_set_from_ratios(ratios.clone(), probs, hi);
        prop_assert!(a.indices.iter().all(|i| b.indices.contains(i)));
        prop_assert!(a.fit() <= b.fit());
        for (i, r) in ratios.iter().enumerate() {
            prop_assert_eq!(b.indices.contains(&i), *r < hi);
        }
    }

    #[test]
    fn buffer_behaves_like_bounded_fifo(cap in 1usize..8, ops in prop::collection::vec(op(), 0..60)) {
        let mut buf = CyclicBuffer::new(cap);
        let mut model: VecDeque<usize> = VecDeque::new();
        let mut next = 0;
        for op in ops {
            match op {
                Op::Insert => {
                    let evicted = buf.insert(tagged(1.0, next));
                    if model.len() == cap {
                        let oldest = model.pop_front().unwrap();
                        prop_assert_eq!(evicted.unwrap().trajectory.episode_index, oldest);
                    } else {
                        prop_assert!(evicted.is_none());
                    }
                    model.push_back(next);
                    next += 1;
                }
                Op::Drop(i) => {
                    let got = buf.drop(i);
                    if i < model.len() {
                        prop_assert_eq!(got.unwrap().trajectory.episode_index, model.remove(i).unwrap());
                    } else {
                        prop_assert!(got.is_err());
                    }
                }
            }
            prop_assert!(buf.len() <= cap);
            let ids: Vec<usize> = buf.iter().map(|e| e.trajectory.episode_index).collect();
            prop_assert_eq!(ids, model.iter().copied().collect::<Vec<_>>());
        }
    }

    #[test]
    fn dr3_thresholds_follow_counts(events in prop::collection::vec(prop::option::of(0usize..25), 1..80)) {
        let schedule = Dr3Schedule::default();
        let mut buf = CyclicBuffer::new(20);
        // Model: (id, admissions after it, uses).
        let mut model: VecDeque<(usize, usize, usize)> = VecDeque::new();
        for (step, ev) in events.into_iter().enumerate() {
            match ev {
                None => {
                    buf.admit_dr3(tagged(1.0, step), &schedule);
                    for m in model.iter_mut() {
                        m.1 += 1;
                    }
                    if model.len() == 20 {
                        model.pop_front();
                    }
                    model.push_back((step, 0, 0));
                }
                Some(i) if i < model.len() => {
                    buf.dr3_threshold_update(ThresholdEvent::EntryUsed(i), &schedule).unwrap();
                    model[i].2 += 1;
                }
                Some(i) => {
                    prop_assert!(buf.dr3_threshold_update(ThresholdEvent::EntryUsed(i), &schedule).is_err());
                }
            }
            for (e, m) in buf.iter().zip(&model) {
                prop_assert_eq!(e.trajectory.episode_index, m.0);
                prop_assert_eq!(e.usage_count, m.2);
                prop_assert_eq!(e.fit_threshold, 0.6 + 0.02 * m.1 as f64 + 0.01 * m.2 as f64);
            }
        }
    }
}

#[test]
fn r3_schedule_endpoints() {
    assert_eq!(r3_fit_threshold(0), 0.77);
    assert_eq!(r3_fit_threshold(5), 0.885);
    assert_eq!(r3_fit_threshold(10), 1.0);
}

#[test]
fn dr3_admission_boundaries() {
    let stats = |rs: &[f64]| RewardStats {
        all_rewards: rs.to_vec(),
    };
    let empty = CyclicBuffer::new(20);
    // Singleton history: std 0, so strictly above the one reward.
    assert!(!dr3_admit(5.0, &empty, &stats(&[5.0])));
    assert!(dr3_admit(5.5, &empty, &stats(&[5.0])));
    // mean 2, population std 1: bar is 3, strict.
    assert!(!dr3_admit(3.0, &empty, &stats(&[1.0, 3.0])));
    assert!(dr3_admit(3.0001, &empty, &stats(&[1.0, 3.0])));
    let schedule = Dr3Schedule::default();
    let mut buf = CyclicBuffer::new(20);
    buf.admit_dr3(tagged(10.0, 0), &schedule);
    buf.admit_dr3(tagged(20.0, 1), &schedule);
    // Nonempty buffer: r ≥ mean(B) = 15, inclusive.
    assert!(dr3_admit(15.0, &buf, &stats(&[100.0])));
    assert!(!dr3_admit(14.999, &buf, &stats(&[0.0])));
}

#[test]
fn dr3_selection_is_strict() {
    let schedule = Dr3Schedule::default();
    let mut buf = CyclicBuffer::new(20);
    for (i, r) in [10.0, 20.0, 30.0].into_iter().enumerate() {
        buf.admit_dr3(tagged(r, i), &schedule);
    }
    let std = (200.0f64 / 3.0).sqrt();
    assert_eq!(dr3_candidates(&buf, 30.0), Vec::<usize>::new());
    assert_eq!(dr3_candidates(&buf, 30.0 - std), Vec::<usize>::new());
    assert_eq!(dr3_candidates(&buf, 30.0 - std - 1e-9), vec![2]);
    assert_eq!(dr3_candidates(&buf, 0.0), vec![0, 1, 2]);
    assert_eq!(dr3_candidates(&buf, 11.0), vec![1, 2]);
    let mut one = CyclicBuffer::new(20);
    one.admit_dr3(tagged(7.0, 0), &schedule);
    assert_eq!(dr3_candidates(&one, 7.0), Vec::<usize>::new());
    assert_eq!(dr3_candidates(&one, 6.9), vec![0]);
}

#[test]
fn replay_with_zero_sigma_trains_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut net = random_net(&mut rng, true);
    let traj = random_trajectory(&net, 5, &mut rng);
    let before = net.clone();
    let mut opt = Optimizer::adam(&net, Default::default());
    let out = train_on_replay(&mut net, &mut opt, &traj, 0.0, &PpoConfig::default()).unwrap();
    assert_eq!(out.fit, 0.0);
    assert!(out.stats.is_none());
    assert_eq!(net, before);
}

#[test]
fn on_policy_replay_keeps_everything() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = random_net(&mut rng, false);
    let traj = random_trajectory(&net, 7, &mut rng);
    let keep = compute_keep_set(&net, &traj, 2.0).unwrap();
    assert_eq!(keep.fit(), 1.0);
    for r in keep.ratios {
        assert!((r - 1.0).abs() < 1e-12);
    }
}
