//! Success buffers and truncated importance-sampled replay.

mod buffer;
mod dr3;
mod importance;

pub use buffer::{BufferEntry, CyclicBuffer, Dr3Schedule, SnapshotRecord, ThresholdEvent};
pub use dr3::{dr3_admit, dr3_candidates, dr3_select, mean, population_std, RewardStats};
pub use importance::{
    compute_keep_set, fit, keep_set_from_ratios, replay_loss, replay_objective, train_on_replay, KeepSet,
    ReplayOutcome,
};

/// Default truncation threshold on importance ratios.
pub const DEFAULT_SIGMA: f64 = 2.0;

/// R3's fit threshold as a function of buffer length: `0.77 + 0.023·len`.
pub fn r3_fit_threshold(buffer_len: usize) -> f64 {
    0.77 + 0.023 * buffer_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r3_schedule_points() {
        assert_eq!(r3_fit_threshold(0), 0.77);
        assert_eq!(r3_fit_threshold(5), 0.885);
        assert_eq!(r3_fit_threshold(10), 1.0);
    }
}
