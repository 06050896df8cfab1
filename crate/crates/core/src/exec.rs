//! Bulk-synchronous execution: a parallel-for over work units that returns
//! only after every unit has finished (the round barrier).

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn workers(&self) -> usize;

    /// Runs `f(i)` for every `i` in `0..n` and waits for all of them.
    fn for_each<F>(&self, n: usize, f: F)
    where
        F: Fn(usize) + Sync + Send;

    /// Like [`Executor::for_each`] but collects results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every unit on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn workers(&self) -> usize {
        1
    }

    fn for_each<F>(&self, n: usize, f: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        (0..n).for_each(f)
    }

    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
