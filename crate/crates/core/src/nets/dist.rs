//! Categorical action distributions over logits.

use rand::Rng;

/// Softmax with max-subtraction.
pub fn action_distribution(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Inverse-CDF draw over the fixed action order. Returns the action and
/// its probability under `dist`.
pub fn sample_action<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> (usize, f64) {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (a, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = a;
        }
        cumulative += p;
        if u < cumulative && p > 0.0 {
            return (a, p);
        }
    }
    // Rounding left the cumulative sum just short of `u`.
    (last_nonzero, dist[last_nonzero])
}

/// Shannon entropy in nats; zero-probability terms contribute nothing.
pub fn entropy(dist: &[f64]) -> f64 {
    -dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// d p_action / d logits.
pub fn prob_grad_logits(dist: &[f64], action: usize) -> Vec<f64> {
    let pa = dist[action];
    dist.iter()
        .enumerate()
        .map(|(j, &pj)| pa * (f64::from(u8::from(j == action)) - pj))
        .collect()
}

/// d H / d logits = -p_j (ln p_j + H).
pub fn entropy_grad_logits(dist: &[f64]) -> Vec<f64> {
    let h = entropy(dist);
    dist.iter()
        .map(|&p| if p > 0.0 { -p * (p.ln() + h) } else { 0.0 })
        .collect()
}

pub fn argmax(values: &[f64]) -> usize {
    // First maximum wins, so ties resolve to the lowest action id.
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
