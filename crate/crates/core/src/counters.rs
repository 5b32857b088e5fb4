//! Per-thread operation counter used to check the flop budgets of the
//! structured operators and the sublinear algorithms.

use std::cell::Cell;

thread_local! {
    static FLOPS: Cell<u64> = const { Cell::new(0) };
}

pub fn add_flops(n: usize) {
    FLOPS.with(|c| c.set(c.get() + n as u64));
}

pub fn flops() -> u64 {
    FLOPS.with(|c| c.get())
}

pub fn reset_flops() {
    FLOPS.with(|c| c.set(0));
}

/// Runs `f` and returns its result with the flops it recorded on this thread.
pub fn count_flops<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = flops();
    let out = f();
    (out, flops() - before)
}
