//! Scheduling of independent trials.

use alloc::vec::Vec;

/// Runs `count` trials indexed `0..count` and returns results in index order.
pub trait TrialRunner: Sync {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl TrialRunner for Sequential {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
