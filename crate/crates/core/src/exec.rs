//! Pluggable map executor.
//!
//! The engine computes the raw coherence of every cluster independently and
//! combines them in a fixed serial pass, so any executor that preserves the
//! index order of results produces bitwise identical output.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluate `f(0..n)` and return the results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Single-threaded executor, always available.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}
