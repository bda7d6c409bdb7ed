//! Disjoint interval sequences and move data structures.
//!
//! A disjoint interval sequence encodes a bijection on `[1, n]` as `k`
//! interval pairs: the `x`-th pair `(p_x, q_x)` shifts the input interval
//! starting at `p_x` onto the output interval starting at `q_x`. Evaluating
//! the bijection at `i` is a shift plus the search for the interval that
//! contains the result. The *move data structure* makes that search
//! constant-time by (a) rebalancing the sequence so no output interval
//! receives more than three input-interval starts, and (b) memoizing, for
//! each output interval, the input interval its start lands in; a query then
//! scans at most four intervals.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::stats;

/// The first condition of the disjoint interval sequence definition that a
/// candidate pair list violates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceViolation {
    /// No pairs at all.
    #[error("a disjoint interval sequence needs at least one pair")]
    Empty,
    /// Input starts must satisfy `1 = p_1 < p_2 < ... <= n`.
    #[error("input starts must be strictly increasing from 1 within the domain (pair {pair})")]
    BadInputStarts { pair: usize },
    /// The lowest output interval must start at 1.
    #[error("the lowest output interval must start at 1, found {found}")]
    FirstOutputNotOne { found: usize },
    /// In output order, each interval must start where the previous ended.
    #[error("output intervals overlap or leave a gap before the interval starting at {start}")]
    BrokenOutputChain { start: usize },
    /// Serialized scan seeds disagree with the pairs they accompany.
    #[error("scan seeds do not match the interval pairs")]
    BadScanSeeds,
    /// A serialized sequence exceeds the fan-in bound queries rely on.
    #[error("sequence is not out-balanced")]
    NotBalanced,
}

/// A validated disjoint interval sequence over the domain `[1, n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointIntervalSequence {
    pairs: Vec<(usize, usize)>,
    n: usize,
}

impl DisjointIntervalSequence {
    /// Validate `pairs` over `[1, n]` and wrap them.
    pub fn new(pairs: Vec<(usize, usize)>, n: usize) -> Result<Self, SequenceViolation> {
        Self::validate_pairs(&pairs, n)?;
        Ok(DisjointIntervalSequence { pairs, n })
    }

    /// Check the defining conditions, reporting the first violated one:
    /// input starts strictly increasing from 1, and output intervals that
    /// tile `[1, n]` exactly when laid end to end in sorted order.
    pub fn validate_pairs(pairs: &[(usize, usize)], n: usize) -> Result<(), SequenceViolation> {
        if pairs.is_empty() {
            return Err(SequenceViolation::Empty);
        }
        if pairs[0].0 != 1 {
            return Err(SequenceViolation::BadInputStarts { pair: 1 });
        }
        for x in 1..pairs.len() {
            if pairs[x].0 <= pairs[x - 1].0 {
                return Err(SequenceViolation::BadInputStarts { pair: x + 1 });
            }
        }
        if pairs[pairs.len() - 1].0 > n {
            return Err(SequenceViolation::BadInputStarts { pair: pairs.len() });
        }

        // Widths are determined by consecutive input starts; walk the output
        // intervals in sorted order and require them to chain seamlessly.
        let mut by_output: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .map(|(x, &(_, q))| (q, width_at(pairs, n, x)))
            .collect();
        by_output.sort_unstable();
        if by_output[0].0 != 1 {
            return Err(SequenceViolation::FirstOutputNotOne {
                found: by_output[0].0,
            });
        }
        let mut expected_next = by_output[0].0 + by_output[0].1;
        for &(q, d) in &by_output[1..] {
            if q != expected_next {
                return Err(SequenceViolation::BrokenOutputChain { start: q });
            }
            expected_next = q + d;
        }
        debug_assert_eq!(expected_next, n + 1);
        Ok(())
    }

    /// Number of interval pairs `k`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Size `n` of the domain.
    pub fn domain(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The 1-based pair `x` as `(input_start, output_start)`.
    pub fn pair(&self, x: usize) -> (usize, usize) {
        self.pairs[x - 1]
    }

    pub fn input_start(&self, x: usize) -> usize {
        self.pairs[x - 1].0
    }

    pub fn output_start(&self, x: usize) -> usize {
        self.pairs[x - 1].1
    }

    /// Width of the 1-based interval `x`.
    pub fn width(&self, x: usize) -> usize {
        width_at(&self.pairs, self.n, x - 1)
    }

    /// The 1-based input interval containing position `i`, by binary search.
    pub fn interval_of(&self, i: usize) -> usize {
        debug_assert!((1..=self.n).contains(&i));
        self.pairs.partition_point(|&(p, _)| p <= i)
    }

    /// Evaluate the bijection at `i` by binary search — the slow reference
    /// path; queries in index operations go through [`MoveStructure`].
    pub fn evaluate(&self, i: usize) -> usize {
        let x = self.interval_of(i);
        let (p, q) = self.pair(x);
        q + (i - p)
    }

    /// Number of input-interval starts falling inside the 1-based output
    /// interval `j` — its fan-in in the permutation graph.
    pub fn fan_in(&self, j: usize) -> usize {
        let q = self.output_start(j);
        let d = self.width(j);
        let lo = self.pairs.partition_point(|&(p, _)| p < q);
        let hi = self.pairs.partition_point(|&(p, _)| p < q + d);
        hi - lo
    }

    /// Whether every output interval has fan-in at most 3.
    pub fn is_out_balanced(&self) -> bool {
        (1..=self.len()).all(|j| self.fan_in(j) <= 3)
    }

    /// Perform one balancing split, or return `None` if the sequence is
    /// already out-balanced.
    ///
    /// The split is deterministic: take the smallest `j` whose output
    /// interval has fan-in at least 4, widen `d` as far as possible while
    /// `[q_j, q_j + d - 1]` keeps exactly two input starts, and split pair
    /// `j` into `(p_j, q_j)` and `(p_j + d, q_j + d)`.
    pub fn split_step(&self) -> Option<DisjointIntervalSequence> {
        let j = (1..=self.len()).find(|&j| self.fan_in(j) >= 4)?;
        let q = self.output_start(j);
        // Fan-in >= 4 guarantees a third input start inside the interval;
        // the window may extend until just before it.
        let first_inside = self.pairs.partition_point(|&(p, _)| p < q);
        let third = self.pairs[first_inside + 2].0;
        let d = third - q;
        let (p, _) = self.pair(j);
        let mut pairs = self.pairs.clone();
        pairs.insert(j, (p + d, q + d));
        debug_assert!(DisjointIntervalSequence::validate_pairs(&pairs, self.n).is_ok());
        Some(DisjointIntervalSequence { pairs, n: self.n })
    }

    /// Fully out-balance the sequence by repeated splitting.
    ///
    /// Equivalent to iterating [`split_step`](Self::split_step) to a fixed
    /// point, but maintains ordered maps of the pairs and a worklist of
    /// over-full output intervals so each split costs logarithmic time plus
    /// the fan-in recounts of the (at most three) affected intervals. The
    /// result has at most `2k` pairs and needs at most `k` splits.
    pub fn balance(&self) -> DisjointIntervalSequence {
        // input start -> output start, and output start -> input start.
        let mut fwd: BTreeMap<usize, usize> = self.pairs.iter().copied().collect();
        let mut rev: BTreeMap<usize, usize> =
            self.pairs.iter().map(|&(p, q)| (q, p)).collect();

        let fan_in = |fwd: &BTreeMap<usize, usize>, p: usize, q: usize| -> usize {
            let d = next_start(fwd, p, self.n) - p;
            fwd.range(q..q + d).count()
        };

        let mut overfull: BTreeSet<usize> = fwd
            .iter()
            .filter(|&(&p, &q)| fan_in(&fwd, p, q) >= 4)
            .map(|(&p, _)| p)
            .collect();

        let split_budget = self.pairs.len();
        let mut splits = 0usize;
        while let Some(&pj) = overfull.iter().next() {
            let qj = fwd[&pj];
            if fan_in(&fwd, pj, qj) < 4 {
                overfull.remove(&pj);
                continue;
            }
            splits += 1;
            assert!(
                splits <= split_budget,
                "balancing exceeded its split budget — invariant broken"
            );

            // Widest window over [q_j, ...] holding exactly two input starts.
            let third = *fwd.range(qj..).nth(2).expect("fan-in >= 4").0;
            let d = third - qj;
            fwd.insert(pj + d, qj + d);
            rev.insert(qj + d, pj + d);

            // Only three output intervals can change fan-in: the two halves
            // of the split pair, and the one the new input start lands in.
            let landing_q = *rev.range(..=pj + d).next_back().expect("outputs tile").0;
            let landing_p = rev[&landing_q];
            for p in [pj, pj + d, landing_p] {
                if fan_in(&fwd, p, fwd[&p]) >= 4 {
                    overfull.insert(p);
                } else {
                    overfull.remove(&p);
                }
            }
        }

        let balanced = DisjointIntervalSequence {
            pairs: fwd.into_iter().collect(),
            n: self.n,
        };
        debug_assert!(balanced.is_out_balanced());
        balanced
    }
}

/// Width of the 0-based pair `x0` in `pairs` over domain `n`.
fn width_at(pairs: &[(usize, usize)], n: usize, x0: usize) -> usize {
    let next = if x0 + 1 == pairs.len() {
        n + 1
    } else {
        pairs[x0 + 1].0
    };
    next - pairs[x0].0
}

/// The input start following `p`, or `n + 1` when `p` is the last one.
fn next_start(fwd: &BTreeMap<usize, usize>, p: usize, n: usize) -> usize {
    fwd.range(p + 1..).next().map(|(&np, _)| np).unwrap_or(n + 1)
}

/// Result of a move query: the mapped position and the 1-based input
/// interval containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveResult {
    pub position: usize,
    pub interval: usize,
}

/// The move data structure: a balanced sequence plus, per pair, the index of
/// the input interval its output start lands in, which seeds the bounded
/// scan of [`query`](MoveStructure::query).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveStructure {
    pairs: Vec<(usize, usize)>,
    scan_start: Vec<usize>,
    n: usize,
}

impl MoveStructure {
    /// Balance `seq` and index it for constant-time queries.
    pub fn build(seq: &DisjointIntervalSequence) -> MoveStructure {
        Self::from_balanced(seq.balance())
    }

    /// Index an already-balanced sequence.
    pub fn from_balanced(seq: DisjointIntervalSequence) -> MoveStructure {
        debug_assert!(seq.is_out_balanced());
        let scan_start = (1..=seq.len())
            .map(|x| seq.interval_of(seq.output_start(x)))
            .collect();
        MoveStructure {
            pairs: seq.pairs,
            scan_start,
            n: seq.n,
        }
    }

    /// Reassemble from serialized parts. The pairs must form a valid
    /// sequence and `scan_start` must match what indexing would compute.
    pub fn from_parts(
        pairs: Vec<(usize, usize)>,
        scan_start: Vec<usize>,
        n: usize,
    ) -> Result<MoveStructure, SequenceViolation> {
        let seq = DisjointIntervalSequence::new(pairs, n)?;
        if !seq.is_out_balanced() {
            return Err(SequenceViolation::NotBalanced);
        }
        let rebuilt = Self::from_balanced(seq);
        if rebuilt.scan_start != scan_start {
            return Err(SequenceViolation::BadScanSeeds);
        }
        Ok(rebuilt)
    }

    /// Number of interval pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Size `n` of the domain.
    pub fn domain(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn scan_starts(&self) -> &[usize] {
        &self.scan_start
    }

    pub fn pair(&self, x: usize) -> (usize, usize) {
        self.pairs[x - 1]
    }

    pub fn input_start(&self, x: usize) -> usize {
        self.pairs[x - 1].0
    }

    /// The 1-based input interval containing `i`, by binary search. Used to
    /// seed query chains; the queries themselves never search globally.
    pub fn interval_of(&self, i: usize) -> usize {
        debug_assert!((1..=self.n).contains(&i));
        self.pairs.partition_point(|&(p, _)| p <= i)
    }

    /// Evaluate the bijection at `i`, which must lie in input interval `x`.
    ///
    /// The mapped position is a constant-offset shift; the interval holding
    /// it is found by scanning forward from the memoized seed, examining at
    /// most four intervals thanks to out-balancing. The caller's `x` is
    /// trusted in release builds and checked in debug builds.
    pub fn query(&self, i: usize, x: usize) -> MoveResult {
        debug_assert!(
            self.input_start(x) <= i
                && (x == self.len() || i < self.input_start(x + 1)),
            "position {i} is not in input interval {x}"
        );
        let (p, q) = self.pair(x);
        let position = q + (i - p);
        let mut interval = self.scan_start[x - 1];
        let mut scanned = 1;
        while interval < self.pairs.len() && self.pairs[interval].0 <= position {
            interval += 1;
            scanned += 1;
        }
        stats::record_move(scanned);
        MoveResult { position, interval }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // The five-pair sequence over [1, 15] used throughout: its fourth output
    // interval [1, 7] receives four input starts.
    fn example_pairs() -> Vec<(usize, usize)> {
        vec![(1, 10), (2, 11), (3, 12), (7, 1), (14, 8)]
    }

    fn example_seq() -> DisjointIntervalSequence {
        DisjointIntervalSequence::new(example_pairs(), 15).unwrap()
    }

    #[test]
    fn example_sequence_is_valid() {
        assert!(DisjointIntervalSequence::validate_pairs(&example_pairs(), 15).is_ok());
    }

    #[test]
    fn trivial_identity_sequence() {
        let seq = DisjointIntervalSequence::new(vec![(1, 1)], 1).unwrap();
        assert_eq!(seq.evaluate(1), 1);
        assert_eq!(seq.fan_in(1), 1);
        assert!(seq.is_out_balanced());
    }

    #[test]
    fn validation_reports_first_violation() {
        use SequenceViolation::*;
        assert_eq!(
            DisjointIntervalSequence::validate_pairs(&[], 1),
            Err(Empty)
        );
        assert_eq!(
            DisjointIntervalSequence::validate_pairs(&[(2, 1)], 3),
            Err(BadInputStarts { pair: 1 })
        );
        assert_eq!(
            DisjointIntervalSequence::validate_pairs(&[(1, 1), (1, 2)], 3),
            Err(BadInputStarts { pair: 2 })
        );
        assert_eq!(
            DisjointIntervalSequence::validate_pairs(&[(1, 2), (2, 1)], 3),
            Err(BrokenOutputChain { start: 2 })
        );
        assert_eq!(
            DisjointIntervalSequence::validate_pairs(&[(1, 2), (2, 3)], 3),
            Err(FirstOutputNotOne { found: 2 })
        );
    }

    #[test]
    fn example_evaluation() {
        let seq = example_seq();
        assert_eq!(seq.evaluate(3), 12);
        assert_eq!(seq.interval_of(12), 4);
        assert_eq!(seq.evaluate(5), 14);
        assert_eq!(seq.interval_of(14), 5);
        assert_eq!(seq.evaluate(8), 2);
        assert_eq!(seq.interval_of(2), 2);
    }

    #[test]
    fn example_fan_in() {
        let seq = example_seq();
        assert_eq!(seq.fan_in(4), 4);
        assert_eq!(seq.fan_in(1), 0);
        assert_eq!(seq.fan_in(2), 0);
        assert_eq!(seq.fan_in(3), 1);
        assert_eq!(seq.fan_in(5), 0);
        assert!(!seq.is_out_balanced());
    }

    #[test]
    fn example_split_and_balance() {
        let seq = example_seq();
        let once = seq.split_step().unwrap();
        assert_eq!(
            once.pairs(),
            &[(1, 10), (2, 11), (3, 12), (7, 1), (9, 3), (14, 8)]
        );
        assert!(once.is_out_balanced());
        assert!(once.split_step().is_none());
        assert_eq!(seq.balance(), once);
    }

    #[test]
    fn balanced_move_queries() {
        let m = MoveStructure::build(&example_seq());
        assert_eq!(m.len(), 6);
        // Same mapped positions as the unbalanced sequence, with intervals
        // now referring to the balanced pair list.
        assert_eq!(m.query(3, 3), MoveResult { position: 12, interval: 5 });
        assert_eq!(m.query(5, 3), MoveResult { position: 14, interval: 6 });
        assert_eq!(m.query(8, 4), MoveResult { position: 2, interval: 2 });
    }

    /// A random valid sequence: cut [1, n] into intervals, then assign the
    /// output order by a random permutation.
    fn arb_sequence(max_n: usize) -> impl Strategy<Value = DisjointIntervalSequence> {
        (1..=max_n)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::btree_set(2..=n.max(2), 0..n.min(60)),
                    any::<u64>(),
                )
            })
            .prop_map(|(n, cuts, seed)| {
                let mut starts: Vec<usize> = std::iter::once(1)
                    .chain(cuts.into_iter().filter(|&c| c <= n))
                    .collect();
                starts.dedup();
                let widths: Vec<usize> = starts
                    .iter()
                    .enumerate()
                    .map(|(x, &p)| {
                        let next = starts.get(x + 1).copied().unwrap_or(n + 1);
                        next - p
                    })
                    .collect();
                // Cheap deterministic shuffle of the output order.
                let mut order: Vec<usize> = (0..starts.len()).collect();
                let mut state = seed | 1;
                for x in (1..order.len()).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    order.swap(x, (state >> 33) as usize % (x + 1));
                }
                let mut outputs = vec![0usize; starts.len()];
                let mut acc = 1;
                for &x in &order {
                    outputs[x] = acc;
                    acc += widths[x];
                }
                let pairs: Vec<(usize, usize)> =
                    starts.into_iter().zip(outputs).collect();
                DisjointIntervalSequence::new(pairs, n).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn balance_preserves_bijection(seq in arb_sequence(500)) {
            let balanced = seq.balance();
            prop_assert!(balanced.is_out_balanced());
            prop_assert!(balanced.len() <= 2 * seq.len());
            prop_assert!(
                DisjointIntervalSequence::validate_pairs(balanced.pairs(), seq.domain()).is_ok()
            );
            for i in 1..=seq.domain() {
                prop_assert_eq!(seq.evaluate(i), balanced.evaluate(i));
            }
        }

        #[test]
        fn split_loop_grows_one_pair_per_step(seq in arb_sequence(400)) {
            let k = seq.len();
            let mut current = seq.clone();
            let mut steps = 0;
            while let Some(next) = current.split_step() {
                steps += 1;
                prop_assert!(steps <= k, "more than k splits");
                prop_assert_eq!(next.len(), k + steps);
                current = next;
            }
            // The incremental path and the worklist path agree exactly.
            prop_assert_eq!(current, seq.balance());
        }

        #[test]
        fn queries_match_evaluation_and_stay_bounded(seq in arb_sequence(500)) {
            let m = MoveStructure::build(&seq);
            stats::reset();
            let mut interval = m.interval_of(1);
            // Exercise every position, threading intervals like real chains.
            for i in 1..=seq.domain() {
                if i > 1 {
                    interval = m.interval_of(i);
                }
                let got = m.query(i, interval);
                prop_assert_eq!(got.position, seq.evaluate(i));
                prop_assert!(m.input_start(got.interval) <= got.position);
                prop_assert!(
                    got.interval == m.len() || got.position < m.input_start(got.interval + 1)
                );
            }
            prop_assert!(stats::snapshot().max_move_scan <= 4);
        }
    }
}
