//! Thread-local operation counters.
//!
//! The index's performance contract is stated in operations — how many
//! intervals a move query may scan, how many rank/select calls a backward
//! search step may issue, how many move queries an extraction may perform.
//! These counters let tests and benchmarks verify those budgets directly.
//! Counting is always on; each counter is a plain thread-local [`Cell`], so
//! the overhead is a handful of nanoseconds per query and readings are not
//! disturbed by concurrent threads.

use std::cell::Cell;

thread_local! {
    static MOVE_QUERIES: Cell<u64> = const { Cell::new(0) };
    static MAX_MOVE_SCAN: Cell<usize> = const { Cell::new(0) };
    static RANK_CALLS: Cell<u64> = const { Cell::new(0) };
    static SELECT_CALLS: Cell<u64> = const { Cell::new(0) };
    static PREDECESSOR_CALLS: Cell<u64> = const { Cell::new(0) };
    static CHARS_EMITTED: Cell<u64> = const { Cell::new(0) };
}

/// Snapshot of the per-thread operation counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    /// Number of move queries answered.
    pub move_queries: u64,
    /// Largest number of intervals any single move query examined.
    pub max_move_scan: usize,
    /// Number of rank queries on the block-head string.
    pub rank_calls: u64,
    /// Number of select queries on the block-head string.
    pub select_calls: u64,
    /// Number of predecessor-interval lookups.
    pub predecessor_calls: u64,
    /// Number of characters produced by extraction.
    pub chars_emitted: u64,
}

/// Reset all counters of the calling thread to zero.
pub fn reset() {
    MOVE_QUERIES.with(|c| c.set(0));
    MAX_MOVE_SCAN.with(|c| c.set(0));
    RANK_CALLS.with(|c| c.set(0));
    SELECT_CALLS.with(|c| c.set(0));
    PREDECESSOR_CALLS.with(|c| c.set(0));
    CHARS_EMITTED.with(|c| c.set(0));
}

/// Read the calling thread's counters.
pub fn snapshot() -> OpCounts {
    OpCounts {
        move_queries: MOVE_QUERIES.with(Cell::get),
        max_move_scan: MAX_MOVE_SCAN.with(Cell::get),
        rank_calls: RANK_CALLS.with(Cell::get),
        select_calls: SELECT_CALLS.with(Cell::get),
        predecessor_calls: PREDECESSOR_CALLS.with(Cell::get),
        chars_emitted: CHARS_EMITTED.with(Cell::get),
    }
}

pub(crate) fn record_move(scanned: usize) {
    MOVE_QUERIES.with(|c| c.set(c.get() + 1));
    MAX_MOVE_SCAN.with(|c| {
        if scanned > c.get() {
            c.set(scanned);
        }
    });
}

pub(crate) fn record_rank() {
    RANK_CALLS.with(|c| c.set(c.get() + 1));
}

pub(crate) fn record_select() {
    SELECT_CALLS.with(|c| c.set(c.get() + 1));
}

pub(crate) fn record_predecessor() {
    PREDECESSOR_CALLS.with(|c| c.set(c.get() + 1));
}

pub(crate) fn record_chars(count: u64) {
    CHARS_EMITTED.with(|c| c.set(c.get() + count));
}
