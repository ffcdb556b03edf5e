//! Parallel trial runner. Results come back in index order, so reductions
//! over them do not depend on the schedule.

use rayon::prelude::*;
use treewalk_core::runner::TrialRunner;

#[derive(Clone, Copy, Debug, Default)]
pub struct Rayon;

impl TrialRunner for Rayon {
    fn map<T: Send, F: Fn(u64) -> T + Sync + Send>(&self, count: u64, f: F) -> Vec<T> {
        (0..count).into_par_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use treewalk_core::runner::Sequential;

    #[test]
    fn matches_the_sequential_runner() {
        let f = |i: u64| i.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
        assert_eq!(Rayon.map(1000, f), Sequential.map(1000, f));
    }
}
