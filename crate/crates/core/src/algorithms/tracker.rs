use std::collections::VecDeque;

/// Sliding window over recent per-episode values (success flags as 0/1, or
/// total rewards).
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessTracker {
    values: VecDeque<f64>,
    window: usize,
    seen: usize,
}

impl SuccessTracker {
    pub fn new(window: usize) -> SuccessTracker {
        let window = window.max(1);
        SuccessTracker {
            values: VecDeque::with_capacity(window),
            window,
            seen: 0,
        }
    }

    pub fn push(&mut self, value: f64) {
        if self.values.len() == self.window {
            self.values.pop_front();
        }
        self.values.push_back(value);
        self.seen += 1;
    }

    pub fn push_success(&mut self, success: bool) {
        self.push(if success { 1.0 } else { 0.0 });
    }

    /// Mean over the last `min(window, episodes so far)` values.
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn episodes_seen(&self) -> usize {
        self.seen
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.window
    }
}

/// When replay switches off for good.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegenerateRule {
    /// Windowed success rate `>= cutoff`.
    SuccessRate { cutoff: f64 },
    /// Windowed mean total reward `> cutoff`.
    MeanReward { cutoff: f64 },
    Never,
}

/// True once the window is full and the rule's condition holds.
pub fn degenerate_check(tracker: &SuccessTracker, rule: DegenerateRule) -> bool {
    if !tracker.is_full() {
        return false;
    }
    let Some(mean) = tracker.mean() else {
        return false;
    };
    match rule {
        DegenerateRule::SuccessRate { cutoff } => mean >= cutoff,
        DegenerateRule::MeanReward { cutoff } => mean > cutoff,
        DegenerateRule::Never => false,
    }
}
