//! The three interval sequences derived from a run-length BWT, and their
//! move structures.
//!
//! * the LF sequence maps each BWT position to the rank of the suffix one
//!   position earlier in the text (run starts carry the pairs; within a run
//!   LF is an offset shift),
//! * the SA sequence maps each sa-value at a run end to its successor in
//!   rank order, extending to all sa-values by the same shift argument —
//!   this is the phi-inverse function used to enumerate occurrences,
//! * the FL sequence inverts LF and steps sa-values forward by one, which
//!   drives extraction.
//!
//! All three are built from the runs alone, without a suffix array: the LF
//! sequence comes from sorting runs by symbol and prefix-summing lengths,
//! and the SA sequence from a single `n`-step LF walk that reads off the
//! sa-values at run boundaries.

use thiserror::Error;

use crate::bwt::Rlbwt;
use crate::move_structure::{DisjointIntervalSequence, MoveResult, MoveStructure};
use crate::stats;

/// Errors raised while deriving the mapping tables.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TablesError {
    /// The runs are structurally sound but their LF mapping does not form a
    /// single cycle through all positions, so they are not the BWT of any
    /// sentinel-terminated text.
    #[error("run-length BWT is not the transform of any text: its LF mapping is not a single cycle")]
    BrokenLfCycle,
}

/// Runs ordered by (symbol, run index): the order in which their images are
/// laid out by LF.
pub(crate) fn run_order(rlbwt: &Rlbwt) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=rlbwt.num_runs()).collect();
    order.sort_unstable_by_key(|&x| (rlbwt.run_symbol(x), x));
    order
}

/// Build the LF interval sequence: one pair per run, mapping the run's
/// start to the rank of its first symbol's LF image. Laying the runs out in
/// (symbol, index) order and prefix-summing their lengths yields exactly
/// those ranks.
pub fn build_lf_intervals(rlbwt: &Rlbwt) -> DisjointIntervalSequence {
    let r = rlbwt.num_runs();
    let mut lf_at_start = vec![0usize; r];
    let mut acc = 1usize;
    for &x in &run_order(rlbwt) {
        lf_at_start[x - 1] = acc;
        acc += rlbwt.run_len(x);
    }
    let pairs: Vec<(usize, usize)> = (1..=r)
        .map(|x| (rlbwt.run_start(x), lf_at_start[x - 1]))
        .collect();
    DisjointIntervalSequence::new(pairs, rlbwt.len())
        .expect("run-derived LF pairs always form a valid sequence")
}

/// Build the SA interval sequence by walking LF across the whole text.
///
/// Starting from position 1 (the rank of the bare sentinel suffix, whose
/// sa-value is `n`), each LF step decreases the current sa-value by one, so
/// the walk visits every position and labels it with its sa-value. The
/// sa-values seen at run ends, paired with the value at the next position
/// (wrapping from `n` to 1), define the sequence; sorting by the run-end
/// values finishes it. Also returns those sorted run-end sa-values.
pub fn build_sa_intervals(
    rlbwt: &Rlbwt,
    move_lf: &MoveStructure,
) -> Result<(DisjointIntervalSequence, Vec<usize>), TablesError> {
    let n = rlbwt.len();
    let r = rlbwt.num_runs();

    // Balanced blocks refine runs, so each block belongs to one run.
    let block_run: Vec<usize> = move_lf
        .pairs()
        .iter()
        .map(|&(p, _)| rlbwt.run_of_position(p).expect("block starts are in range"))
        .collect();

    let mut start_value = vec![0usize; r];
    let mut end_value = vec![0usize; r];
    let mut pos = 1usize;
    let mut block = 1usize;
    for step in 0..n {
        let value = n - step;
        let run = block_run[block - 1];
        if pos == rlbwt.run_start(run) {
            start_value[run - 1] = value;
        }
        if pos == rlbwt.run_end(run) {
            end_value[run - 1] = value;
        }
        if step + 1 < n {
            let next = move_lf.query(pos, block);
            pos = next.position;
            block = next.interval;
            if pos == 1 {
                return Err(TablesError::BrokenLfCycle);
            }
        }
    }

    // A run end at position e pairs with position e + 1, which is the next
    // run's start; the final run end (position n) wraps to position 1.
    let mut pairs: Vec<(usize, usize)> = (1..=r)
        .map(|x| {
            let partner_run = if rlbwt.run_end(x) == n { 1 } else { x + 1 };
            (end_value[x - 1], start_value[partner_run - 1])
        })
        .collect();
    pairs.sort_unstable();
    let samples: Vec<usize> = pairs.iter().map(|&(u, _)| u).collect();
    let seq = DisjointIntervalSequence::new(pairs, n)
        .expect("run-end sa-values always form a valid sequence");
    Ok((seq, samples))
}

/// Build the FL interval sequence by inverting the LF sequence: swap every
/// pair and re-sort by input start.
pub fn build_fl_intervals(lf: &DisjointIntervalSequence) -> DisjointIntervalSequence {
    let mut pairs: Vec<(usize, usize)> = lf.pairs().iter().map(|&(p, q)| (q, p)).collect();
    pairs.sort_unstable();
    DisjointIntervalSequence::new(pairs, lf.domain())
        .expect("inverting a valid sequence yields a valid sequence")
}

/// The balanced move structures for LF, phi-inverse, and FL, plus the two
/// run-level tables kept alongside them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveTables {
    move_lf: MoveStructure,
    move_sa: MoveStructure,
    move_fl: MoveStructure,
    /// Run indexes sorted by (symbol, run index) — the layout order of LF.
    lf_run_order: Vec<usize>,
    /// The sorted sa-values at run ends.
    run_end_samples: Vec<usize>,
}

impl MoveTables {
    /// Derive all tables from the runs. Fails only when the runs are not
    /// the BWT of any text.
    pub fn build(rlbwt: &Rlbwt) -> Result<MoveTables, TablesError> {
        let i_lf = build_lf_intervals(rlbwt);
        let move_lf = MoveStructure::build(&i_lf);
        let (i_sa, run_end_samples) = build_sa_intervals(rlbwt, &move_lf)?;
        let move_sa = MoveStructure::build(&i_sa);
        let move_fl = MoveStructure::build(&build_fl_intervals(&i_lf));
        Ok(MoveTables {
            move_lf,
            move_sa,
            move_fl,
            lf_run_order: run_order(rlbwt),
            run_end_samples,
        })
    }

    pub(crate) fn from_parts(
        move_lf: MoveStructure,
        move_sa: MoveStructure,
        move_fl: MoveStructure,
        lf_run_order: Vec<usize>,
        run_end_samples: Vec<usize>,
    ) -> MoveTables {
        MoveTables {
            move_lf,
            move_sa,
            move_fl,
            lf_run_order,
            run_end_samples,
        }
    }

    /// Text length `n`.
    pub fn domain(&self) -> usize {
        self.move_lf.domain()
    }

    /// One LF step from position `i` inside LF block `block`.
    pub fn lf(&self, i: usize, block: usize) -> MoveResult {
        self.move_lf.query(i, block)
    }

    /// One phi-inverse step: the sa-value following `value` in rank order.
    /// `block` is the SA block containing `value`.
    pub fn phi_inv(&self, value: usize, block: usize) -> MoveResult {
        self.move_sa.query(value, block)
    }

    /// One FL step from position `i` inside FL block `block`; inverts `lf`.
    pub fn fl(&self, i: usize, block: usize) -> MoveResult {
        self.move_fl.query(i, block)
    }

    /// The SA block containing `value - 1`, given the block containing
    /// `value`. `None` when `value` is 1, which has no predecessor.
    ///
    /// Works because SA blocks are left-closed: `value - 1` leaves the block
    /// of `value` only when `value` sits exactly on its block start.
    pub fn predecessor_block(&self, value: usize, block: usize) -> Option<usize> {
        stats::record_predecessor();
        if value == 1 {
            return None;
        }
        if self.move_sa.input_start(block) == value {
            Some(block - 1)
        } else {
            Some(block)
        }
    }

    /// Seed helper: the LF block containing position `i`, by binary search.
    pub fn lf_block_of(&self, i: usize) -> usize {
        self.move_lf.interval_of(i)
    }

    /// Seed helper: the SA block containing sa-value `value`.
    pub fn sa_block_of(&self, value: usize) -> usize {
        self.move_sa.interval_of(value)
    }

    /// Seed helper: the FL block containing position `i`.
    pub fn fl_block_of(&self, i: usize) -> usize {
        self.move_fl.interval_of(i)
    }

    pub fn move_lf(&self) -> &MoveStructure {
        &self.move_lf
    }

    pub fn move_sa(&self) -> &MoveStructure {
        &self.move_sa
    }

    pub fn move_fl(&self) -> &MoveStructure {
        &self.move_fl
    }

    pub fn lf_run_order(&self) -> &[usize] {
        &self.lf_run_order
    }

    pub fn run_end_samples(&self) -> &[usize] {
        &self.run_end_samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bwt::{build_suffix_array, bwt_from_sa, Run, Text, SENTINEL};
    use crate::oracle;
    use proptest::prelude::*;

    const EXAMPLE_TEXT: &[u8] = b"baababaabaabab";

    fn example_rlbwt() -> Rlbwt {
        let t = Text::from_bytes(EXAMPLE_TEXT).unwrap();
        Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)))
    }

    #[test]
    fn example_lf_intervals() {
        let i_lf = build_lf_intervals(&example_rlbwt());
        assert_eq!(i_lf.pairs(), &[(1, 10), (7, 2), (13, 1), (14, 8)]);
        // Already out-balanced for this text, so the move structure keeps
        // the same four pairs.
        assert!(i_lf.is_out_balanced());
    }

    #[test]
    fn example_sa_intervals() {
        let rlbwt = example_rlbwt();
        let move_lf = MoveStructure::build(&build_lf_intervals(&rlbwt));
        let (i_sa, samples) = build_sa_intervals(&rlbwt, &move_lf).unwrap();
        assert_eq!(i_sa.pairs(), &[(1, 12), (4, 15), (5, 8), (9, 1)]);
        assert_eq!(samples, vec![1, 4, 5, 9]);
    }

    #[test]
    fn example_fl_intervals() {
        let i_fl = build_fl_intervals(&build_lf_intervals(&example_rlbwt()));
        assert_eq!(i_fl.pairs(), &[(1, 13), (2, 7), (8, 14), (10, 1)]);
    }

    #[test]
    fn example_lf_steps() {
        let tables = MoveTables::build(&example_rlbwt()).unwrap();
        // LF at the four run starts.
        for (start, expect) in [(1, 10), (7, 2), (13, 1), (14, 8)] {
            let got = tables.lf(start, tables.lf_block_of(start));
            assert_eq!(got.position, expect);
        }
        // Interior positions shift with their run.
        assert_eq!(tables.lf(3, tables.lf_block_of(3)).position, 12);
        assert_eq!(tables.lf(8, tables.lf_block_of(8)).position, 3);
    }

    #[test]
    fn example_phi_steps() {
        let tables = MoveTables::build(&example_rlbwt()).unwrap();
        for (value, expect) in [(1, 12), (4, 15), (5, 8), (9, 1)] {
            let got = tables.phi_inv(value, tables.sa_block_of(value));
            assert_eq!(got.position, expect);
        }
        assert_eq!(tables.phi_inv(3, tables.sa_block_of(3)).position, 14);
        assert_eq!(tables.phi_inv(8, tables.sa_block_of(8)).position, 11);
    }

    #[test]
    fn example_predecessor_blocks() {
        let tables = MoveTables::build(&example_rlbwt()).unwrap();
        // SA blocks for this text: [1,3], [4,4], [5,8], [9,15].
        assert_eq!(tables.predecessor_block(15, 4), Some(4));
        assert_eq!(tables.predecessor_block(9, 4), Some(3));
        assert_eq!(tables.predecessor_block(5, 3), Some(2));
        assert_eq!(tables.predecessor_block(4, 2), Some(1));
        assert_eq!(tables.predecessor_block(1, 1), None);
    }

    #[test]
    fn sentinel_only_text() {
        let t = Text::from_bytes(b"").unwrap();
        let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
        let tables = MoveTables::build(&rlbwt).unwrap();
        assert_eq!(tables.domain(), 1);
        assert_eq!(tables.lf(1, 1).position, 1);
        assert_eq!(tables.phi_inv(1, 1).position, 1);
        assert_eq!(tables.fl(1, 1).position, 1);
    }

    #[test]
    fn fake_bwt_is_rejected() {
        // Structurally valid runs whose LF mapping splits into two cycles.
        let runs = vec![
            Run { symbol: b'a', start: 1 },
            Run { symbol: SENTINEL, start: 2 },
            Run { symbol: b'b', start: 3 },
        ];
        let rlbwt = Rlbwt::from_runs(runs, 3).unwrap();
        assert_eq!(MoveTables::build(&rlbwt), Err(TablesError::BrokenLfCycle));
    }

    fn arb_text(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
        (prop::sample::select(vec![2u8, 4, 26]), 0..=max_len).prop_flat_map(|(sigma, len)| {
            prop::collection::vec(0..sigma, len)
                .prop_map(|v| v.iter().map(|&b| b + b'a').collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tables_match_oracle(raw in arb_text(300)) {
            let t = Text::from_bytes(&raw).unwrap();
            let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
            let naive = oracle::build(&t);
            let tables = MoveTables::build(&rlbwt).unwrap();
            let n = t.len();

            for i in 1..=n {
                prop_assert_eq!(
                    tables.lf(i, tables.lf_block_of(i)).position,
                    naive.lf[i - 1]
                );
                prop_assert_eq!(
                    tables.fl(i, tables.fl_block_of(i)).position,
                    naive.fl[i - 1]
                );
            }
            for s in 1..=n {
                prop_assert_eq!(
                    tables.phi_inv(s, tables.sa_block_of(s)).position,
                    naive.phi_inv[s - 1]
                );
            }
        }

        #[test]
        fn phi_chain_enumerates_suffix_array(raw in arb_text(300)) {
            let t = Text::from_bytes(&raw).unwrap();
            let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
            let naive = oracle::build(&t);
            let tables = MoveTables::build(&rlbwt).unwrap();
            let n = t.len();

            // Chain phi-inverse from SA[1] = n and compare against the
            // oracle suffix array in rank order.
            let mut value = n;
            let mut block = tables.sa_block_of(value);
            prop_assert_eq!(value, naive.sa[0]);
            for rank in 2..=n {
                let next = tables.phi_inv(value, block);
                value = next.position;
                block = next.interval;
                prop_assert_eq!(value, naive.sa[rank - 1]);
            }
        }

        #[test]
        fn balanced_sizes_stay_within_twice_the_runs(raw in arb_text(500)) {
            let t = Text::from_bytes(&raw).unwrap();
            let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
            let r = rlbwt.num_runs();
            let tables = MoveTables::build(&rlbwt).unwrap();
            prop_assert!(tables.move_lf().len() <= 2 * r);
            prop_assert!(tables.move_sa().len() <= 2 * r);
            prop_assert!(tables.move_fl().len() <= 2 * r);
        }
    }
}
