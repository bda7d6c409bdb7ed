//! The search index: counting and locating via backward search on
//! balanced sa-intervals.
//!
//! Backward search extends the matched pattern one symbol to the left per
//! step. The state is a *balanced sa-interval*: the sa-interval `[lo, hi]`
//! of the current suffix of the pattern, the sa-value at `lo`, and the
//! blocks of the LF and SA move structures containing `lo`, `hi`, and that
//! sa-value. Carrying the blocks is what lets every step run in constant
//! time — no global searches happen after the initial seed.
//!
//! A step refines the interval to the occurrences of the new symbol using
//! rank/select over the per-block head symbols (the toehold refinement),
//! maps both ends through LF, and maintains the sa-value by the fact that
//! prepending a symbol shifts the suffix start left by one.

use crate::bwt::{build_suffix_array, bwt_from_sa, Rlbwt, Text, SENTINEL};
use crate::stats;
use crate::tables::{MoveTables, TablesError};

/// Rank/select over a small symbol string — here, the per-block head
/// symbols of the LF move structure. Stores, per distinct symbol, the
/// sorted list of its 1-based occurrence positions; rank is a binary
/// search, select an array lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSelect {
    symbols: Vec<u8>,
    /// 256-entry symbol table mapping a byte to its occurrence list.
    ids: Vec<Option<usize>>,
    positions: Vec<Vec<usize>>,
}

impl RankSelect {
    pub fn new(symbols: Vec<u8>) -> RankSelect {
        let mut ids: Vec<Option<usize>> = vec![None; 256];
        let mut positions: Vec<Vec<usize>> = Vec::new();
        for (at, &c) in symbols.iter().enumerate() {
            let id = match ids[c as usize] {
                Some(id) => id,
                None => {
                    positions.push(Vec::new());
                    ids[c as usize] = Some(positions.len() - 1);
                    positions.len() - 1
                }
            };
            positions[id].push(at + 1);
        }
        RankSelect {
            symbols,
            ids,
            positions,
        }
    }

    /// Occurrences of `c` among the first `prefix` symbols.
    pub fn rank(&self, c: u8, prefix: usize) -> usize {
        stats::record_rank();
        match self.ids[c as usize] {
            None => 0,
            Some(id) => self.positions[id].partition_point(|&p| p <= prefix),
        }
    }

    /// 1-based position of the `nth` occurrence of `c`, if it exists.
    pub fn select(&self, c: u8, nth: usize) -> Option<usize> {
        stats::record_select();
        if nth == 0 {
            return None;
        }
        let id = self.ids[c as usize]?;
        self.positions[id].get(nth - 1).copied()
    }

    /// The symbol at 1-based position `t`.
    pub fn symbol(&self, t: usize) -> u8 {
        self.symbols[t - 1]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }
}

/// Per-LF-block suffix array samples: for each block of the LF move
/// structure, the sa-value at its starting position and the SA block
/// containing that value. These provide the toehold when a backward-search
/// step moves `lo` onto a block start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaSamples {
    values: Vec<usize>,
    blocks: Vec<usize>,
}

impl SaSamples {
    /// The sa-value at the start of 1-based LF block `x`.
    pub fn value(&self, x: usize) -> usize {
        self.values[x - 1]
    }

    /// The SA block containing `value(x)`.
    pub fn block(&self, x: usize) -> usize {
        self.blocks[x - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub(crate) fn from_parts(values: Vec<usize>, blocks: Vec<usize>) -> SaSamples {
        SaSamples { values, blocks }
    }
}

/// The backward-search state for one matched pattern suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalancedSaInterval {
    /// First rank of the sa-interval.
    pub lo: usize,
    /// Last rank of the sa-interval.
    pub hi: usize,
    /// The sa-value at rank `lo`.
    pub sa_lo: usize,
    /// LF block containing `lo`.
    pub lo_block: usize,
    /// LF block containing `hi`.
    pub hi_block: usize,
    /// SA block containing `sa_lo`.
    pub sa_lo_block: usize,
}

impl BalancedSaInterval {
    /// Number of ranks covered.
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Result of the toehold refinement: the sub-interval of `[lo, hi]` whose
/// BWT symbols equal the extension symbol, with its end blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toehold {
    /// LF block containing the refined `lo`.
    pub lo_block: usize,
    /// LF block containing the refined `hi`.
    pub hi_block: usize,
    /// First rank in `[lo, hi]` carrying the symbol.
    pub lo: usize,
    /// Last rank in `[lo, hi]` carrying the symbol.
    pub hi: usize,
}

/// Narrow `[lo, hi]` to the ranks whose BWT symbol is `c`, using only the
/// per-block head symbols: two ranks, two selects, and block arithmetic.
///
/// `heads` is the rank/select structure over the block head symbols,
/// `block_starts` the sorted block starting positions, and `n` the text
/// length. `lo_block`/`hi_block` must contain `lo`/`hi`. Returns `None`
/// when no rank in the interval carries `c`.
///
/// The runs of the BWT make this work: a block whose head symbol is not
/// `c` but that intersects `[lo, hi]` in a position carrying `c` can only
/// be the first block (where `c`-positions start at the next `c`-headed
/// block) or the last (where they end just before the block following the
/// last `c`-headed one).
pub fn toehold_refine(
    heads: &RankSelect,
    block_starts: &[usize],
    n: usize,
    lo: usize,
    hi: usize,
    lo_block: usize,
    hi_block: usize,
    c: u8,
) -> Option<Toehold> {
    let before = heads.rank(c, lo_block - 1);
    let through = heads.rank(c, hi_block);
    if through == before {
        return None;
    }
    let head = heads.select(c, before + 1).expect("rank found an occurrence");
    let tail = heads.select(c, through).expect("rank found an occurrence");
    let refined_lo = if heads.symbol(lo_block) == c {
        lo
    } else {
        block_starts[head - 1]
    };
    let refined_hi = if heads.symbol(hi_block) == c {
        hi
    } else {
        block_starts.get(tail).copied().unwrap_or(n + 1) - 1
    };
    Some(Toehold {
        lo_block: head,
        hi_block: tail,
        lo: refined_lo,
        hi: refined_hi,
    })
}

/// The full search index over one text.
#[derive(Debug, Clone)]
pub struct OptBwtrIndex {
    rlbwt: Rlbwt,
    tables: MoveTables,
    heads: RankSelect,
    samples: SaSamples,
    lf_block_starts: Vec<usize>,
}

impl OptBwtrIndex {
    /// Build the index for a text: suffix array, BWT, runs, tables.
    pub fn build(text: &Text) -> OptBwtrIndex {
        let sa = build_suffix_array(text);
        let rlbwt = Rlbwt::encode(&bwt_from_sa(text, &sa));
        Self::from_rlbwt(rlbwt).expect("the BWT of a real text always has a full LF cycle")
    }

    /// Build the index from a run-length BWT alone.
    pub fn from_rlbwt(rlbwt: Rlbwt) -> Result<OptBwtrIndex, TablesError> {
        let tables = MoveTables::build(&rlbwt)?;
        let lf_block_starts: Vec<usize> =
            tables.move_lf().pairs().iter().map(|&(p, _)| p).collect();
        let head_symbols: Vec<u8> = lf_block_starts
            .iter()
            .map(|&p| {
                let run = rlbwt.run_of_position(p).expect("block starts are in range");
                rlbwt.run_symbol(run)
            })
            .collect();
        let samples = build_samples(&tables)?;
        Ok(OptBwtrIndex {
            rlbwt,
            tables,
            heads: RankSelect::new(head_symbols),
            samples,
            lf_block_starts,
        })
    }

    pub(crate) fn from_parts(
        rlbwt: Rlbwt,
        tables: MoveTables,
        heads: RankSelect,
        samples: SaSamples,
    ) -> OptBwtrIndex {
        let lf_block_starts = tables.move_lf().pairs().iter().map(|&(p, _)| p).collect();
        OptBwtrIndex {
            rlbwt,
            tables,
            heads,
            samples,
            lf_block_starts,
        }
    }

    /// Text length `n`, sentinel included.
    pub fn text_len(&self) -> usize {
        self.tables.domain()
    }

    /// Number of BWT runs `r`.
    pub fn num_runs(&self) -> usize {
        self.rlbwt.num_runs()
    }

    pub fn rlbwt(&self) -> &Rlbwt {
        &self.rlbwt
    }

    pub fn tables(&self) -> &MoveTables {
        &self.tables
    }

    pub fn heads(&self) -> &RankSelect {
        &self.heads
    }

    pub fn samples(&self) -> &SaSamples {
        &self.samples
    }

    /// The state matching the empty pattern: the whole rank range, with
    /// `sa_lo = n` because rank 1 is the bare sentinel suffix.
    pub fn empty_pattern_interval(&self) -> BalancedSaInterval {
        BalancedSaInterval {
            lo: 1,
            hi: self.text_len(),
            sa_lo: self.text_len(),
            lo_block: 1,
            hi_block: self.tables.move_lf().len(),
            sa_lo_block: self.tables.move_sa().len(),
        }
    }

    /// One backward-search step: extend the matched suffix by `c` on the
    /// left. Costs at most two ranks, two selects, two move queries, and
    /// one predecessor lookup. `None` means the extended pattern does not
    /// occur.
    pub fn bsr_query(
        &self,
        cur: &BalancedSaInterval,
        c: u8,
    ) -> Option<BalancedSaInterval> {
        if c == SENTINEL {
            return None;
        }
        let refined = toehold_refine(
            &self.heads,
            &self.lf_block_starts,
            self.text_len(),
            cur.lo,
            cur.hi,
            cur.lo_block,
            cur.hi_block,
            c,
        )?;
        // The sa-value at the refined lo: unchanged if lo kept its place,
        // otherwise sampled at the block start the refinement landed on.
        let (sa_top, sa_top_block) = if refined.lo == cur.lo {
            (cur.sa_lo, cur.sa_lo_block)
        } else {
            (
                self.samples.value(refined.lo_block),
                self.samples.block(refined.lo_block),
            )
        };
        let lo_step = self.tables.lf(refined.lo, refined.lo_block);
        let hi_step = self.tables.lf(refined.hi, refined.hi_block);
        let sa_block = self
            .tables
            .predecessor_block(sa_top, sa_top_block)
            .expect("a suffix preceded by a non-sentinel symbol never starts at 1");
        Some(BalancedSaInterval {
            lo: lo_step.position,
            hi: hi_step.position,
            sa_lo: sa_top - 1,
            lo_block: lo_step.interval,
            hi_block: hi_step.interval,
            sa_lo_block: sa_block,
        })
    }

    /// The balanced sa-interval of `pattern`, fed right to left, or `None`
    /// when it does not occur in the text.
    pub fn pattern_interval(&self, pattern: &[u8]) -> Option<BalancedSaInterval> {
        let mut cur = self.empty_pattern_interval();
        for &c in pattern.iter().rev() {
            cur = self.bsr_query(&cur, c)?;
        }
        Some(cur)
    }

    /// Number of occurrences of `pattern` in the text body. The empty
    /// pattern matches everywhere, boundary included: `n` occurrences.
    pub fn count(&self, pattern: &[u8]) -> usize {
        match self.pattern_interval(pattern) {
            Some(cur) => cur.len(),
            None => 0,
        }
    }

    /// All 1-based occurrence positions of `pattern`, in suffix array
    /// order: the sa-value at `lo` followed by one phi-inverse step per
    /// further occurrence.
    pub fn locate(&self, pattern: &[u8]) -> Vec<usize> {
        let Some(cur) = self.pattern_interval(pattern) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(cur.len());
        let mut value = cur.sa_lo;
        let mut block = cur.sa_lo_block;
        out.push(value);
        for _ in cur.lo..cur.hi {
            let next = self.tables.phi_inv(value, block);
            value = next.position;
            block = next.interval;
            out.push(value);
        }
        out
    }
}

/// Tabulate the sa-value at every LF block start with one LF walk: the walk
/// from position 1 visits all positions, labeling each with its sa-value.
fn build_samples(tables: &MoveTables) -> Result<SaSamples, TablesError> {
    let move_lf = tables.move_lf();
    let n = move_lf.domain();
    let mut values = vec![0usize; move_lf.len()];
    let mut pos = 1usize;
    let mut block = 1usize;
    for step in 0..n {
        if move_lf.input_start(block) == pos {
            values[block - 1] = n - step;
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
    let blocks = values.iter().map(|&v| tables.sa_block_of(v)).collect();
    Ok(SaSamples { values, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    const EXAMPLE_TEXT: &[u8] = b"baababaabaabab";

    fn example_index() -> OptBwtrIndex {
        OptBwtrIndex::build(&Text::from_bytes(EXAMPLE_TEXT).unwrap())
    }

    #[test]
    fn rank_select_on_block_heads() {
        let rs = RankSelect::new(b"bba\0a".to_vec());
        assert_eq!(rs.rank(b'a', 5), 2);
        assert_eq!(rs.rank(b'a', 0), 0);
        assert_eq!(rs.rank(b'b', 2), 2);
        assert_eq!(rs.rank(b'z', 5), 0);
        assert_eq!(rs.select(b'a', 1), Some(3));
        assert_eq!(rs.select(b'a', 2), Some(5));
        assert_eq!(rs.select(b'a', 3), None);
        assert_eq!(rs.select(b'z', 1), None);
        assert_eq!(rs.select(b'a', 0), None);
        assert_eq!(rs.symbol(4), SENTINEL);
    }

    #[test]
    fn toehold_on_given_blocks() {
        // Block heads and starts laid out by hand over a 15-long BWT of
        // six b's, six a's, a sentinel, and two a's.
        let rs = RankSelect::new(b"bba\0a".to_vec());
        let starts = [1usize, 4, 7, 13, 14];
        let got = toehold_refine(&rs, &starts, 15, 3, 14, 1, 5, b'a').unwrap();
        assert_eq!(
            got,
            Toehold {
                lo_block: 3,
                hi_block: 5,
                lo: 7,
                hi: 14
            }
        );
        // No sentinel anywhere in [2, 5]'s blocks beyond block 4 itself.
        assert!(toehold_refine(&rs, &starts, 15, 1, 2, 1, 1, b'a').is_none());
    }

    #[test]
    fn example_empty_pattern_interval() {
        let index = example_index();
        assert_eq!(
            index.empty_pattern_interval(),
            BalancedSaInterval {
                lo: 1,
                hi: 15,
                sa_lo: 15,
                lo_block: 1,
                hi_block: 4,
                sa_lo_block: 4
            }
        );
    }

    #[test]
    fn example_samples() {
        let index = example_index();
        assert_eq!(index.samples().values(), &[15, 8, 1, 12]);
        assert_eq!(index.samples().blocks(), &[4, 3, 1, 4]);
        assert_eq!(index.heads().symbols(), b"ba\0a");
    }

    #[test]
    fn example_backward_search_chain() {
        let index = example_index();
        let empty = index.empty_pattern_interval();
        let b = index.bsr_query(&empty, b'b').unwrap();
        assert_eq!(
            b,
            BalancedSaInterval {
                lo: 10,
                hi: 15,
                sa_lo: 14,
                lo_block: 2,
                hi_block: 4,
                sa_lo_block: 4
            }
        );
        let ab = index.bsr_query(&b, b'a').unwrap();
        assert_eq!(
            ab,
            BalancedSaInterval {
                lo: 5,
                hi: 9,
                sa_lo: 13,
                lo_block: 1,
                hi_block: 2,
                sa_lo_block: 4
            }
        );
        let bab = index.bsr_query(&ab, b'b').unwrap();
        assert_eq!(
            bab,
            BalancedSaInterval {
                lo: 14,
                hi: 15,
                sa_lo: 12,
                lo_block: 4,
                hi_block: 4,
                sa_lo_block: 4
            }
        );
    }

    #[test]
    fn example_toehold_for_final_extension() {
        // Extending "ab" by 'b': the interval [5, 9] narrows to [5, 6]
        // before the LF step.
        let index = example_index();
        let ab = index.pattern_interval(b"ab").unwrap();
        let starts: Vec<usize> = index
            .tables()
            .move_lf()
            .pairs()
            .iter()
            .map(|&(p, _)| p)
            .collect();
        let refined = toehold_refine(
            index.heads(),
            &starts,
            15,
            ab.lo,
            ab.hi,
            ab.lo_block,
            ab.hi_block,
            b'b',
        )
        .unwrap();
        assert_eq!(refined.lo, 5);
        assert_eq!(refined.hi, 6);
    }

    #[test]
    fn example_count_and_locate() {
        let index = example_index();
        assert_eq!(index.count(b"ab"), 5);
        assert_eq!(index.count(b"bab"), 2);
        assert_eq!(index.count(b"aab"), 3);
        assert_eq!(index.count(b"abc"), 0);
        assert_eq!(index.locate(b"bab"), vec![12, 4]);
        let mut ab = index.locate(b"ab");
        ab.sort_unstable();
        assert_eq!(ab, vec![3, 5, 8, 11, 13]);
    }

    #[test]
    fn empty_pattern_counts_every_boundary() {
        let index = example_index();
        assert_eq!(index.count(b""), 15);
        let mut all = index.locate(b"");
        all.sort_unstable();
        assert_eq!(all, (1..=15).collect::<Vec<_>>());
    }

    #[test]
    fn sentinel_in_pattern_never_matches() {
        let index = example_index();
        assert_eq!(index.count(b"\0"), 0);
        assert_eq!(index.count(b"ab\0"), 0);
        assert_eq!(index.locate(b"\0ab"), Vec::<usize>::new());
    }

    #[test]
    fn pattern_longer_than_text() {
        let index = example_index();
        assert_eq!(index.count(b"bababababababababababab"), 0);
    }

    #[test]
    fn sentinel_only_text_queries() {
        let index = OptBwtrIndex::build(&Text::from_bytes(b"").unwrap());
        assert_eq!(index.count(b""), 1);
        assert_eq!(index.locate(b""), vec![1]);
        assert_eq!(index.count(b"a"), 0);
        assert_eq!(
            index.empty_pattern_interval(),
            BalancedSaInterval {
                lo: 1,
                hi: 1,
                sa_lo: 1,
                lo_block: 1,
                hi_block: 1,
                sa_lo_block: 1
            }
        );
    }

    #[test]
    fn step_cost_budget() {
        let index = example_index();
        let ab = index.pattern_interval(b"ab").unwrap();
        stats::reset();
        index.bsr_query(&ab, b'b').unwrap();
        let counts = stats::snapshot();
        assert!(counts.rank_calls <= 2, "rank calls: {}", counts.rank_calls);
        assert!(counts.select_calls <= 2, "select calls: {}", counts.select_calls);
        assert_eq!(counts.move_queries, 2);
        assert_eq!(counts.predecessor_calls, 1);
    }

    #[test]
    fn queries_are_shareable_across_threads() {
        let index = example_index();
        std::thread::scope(|scope| {
            for _ in 0..4 {
                scope.spawn(|| {
                    for _ in 0..50 {
                        assert_eq!(index.count(b"ab"), 5);
                        assert_eq!(index.locate(b"bab"), vec![12, 4]);
                    }
                });
            }
        });
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
        fn rank_select_match_scans(symbols in prop::collection::vec(prop::sample::select(b"ab\0cz".to_vec()), 0..60)) {
            let rs = RankSelect::new(symbols.clone());
            for c in [b'a', b'b', b'c', b'z', SENTINEL, b'q'] {
                for prefix in 0..=symbols.len() {
                    prop_assert_eq!(rs.rank(c, prefix), oracle::rank_scan(&symbols, c, prefix));
                }
                for nth in 1..=symbols.len() + 1 {
                    prop_assert_eq!(rs.select(c, nth), oracle::select_scan(&symbols, c, nth));
                }
                // Adjunction: select(rank(i)) <= i < select(rank(i) + 1).
                for i in 1..=symbols.len() {
                    let k = rs.rank(c, i);
                    if let Some(at) = rs.select(c, k) {
                        prop_assert!(at <= i);
                    }
                    if let Some(at) = rs.select(c, k + 1) {
                        prop_assert!(at > i);
                    }
                }
            }
        }

        #[test]
        fn search_matches_oracle(raw in arb_text(250), patterns in prop::collection::vec(prop::collection::vec(prop::sample::select(b"abcd".to_vec()), 0..6), 12)) {
            let t = Text::from_bytes(&raw).unwrap();
            let index = OptBwtrIndex::build(&t);
            let naive = oracle::build(&t);
            for p in &patterns {
                let hits = oracle::occurrences(&t, p);
                prop_assert_eq!(index.count(p), hits.len());
                let mut got = index.locate(p);
                got.sort_unstable();
                prop_assert_eq!(got, hits);
                // The interval agrees with the oracle's binary search.
                let expect = oracle::sa_interval(&t, &naive, p);
                let got_interval = index.pattern_interval(p).map(|b| (b.lo, b.hi));
                prop_assert_eq!(got_interval, expect);
            }
        }

        #[test]
        fn intermediate_states_are_correct(raw in arb_text(250)) {
            // Feed a pattern sampled from the text and check the balanced
            // sa-interval invariants after every extension step.
            let t = Text::from_bytes(&raw).unwrap();
            prop_assume!(t.len() > 3);
            let index = OptBwtrIndex::build(&t);
            let naive = oracle::build(&t);
            let body = t.without_sentinel();
            let take = body.len().min(8);
            let pattern = &body[body.len() - take..];

            let mut cur = index.empty_pattern_interval();
            for (fed, &c) in pattern.iter().rev().enumerate() {
                let Some(next) = index.bsr_query(&cur, c) else {
                    unreachable!("a text suffix always occurs");
                };
                let suffix = &pattern[pattern.len() - fed - 1..];
                let (lo, hi) = oracle::sa_interval(&t, &naive, suffix).unwrap();
                prop_assert_eq!(next.lo, lo);
                prop_assert_eq!(next.hi, hi);
                prop_assert_eq!(next.sa_lo, naive.sa[lo - 1]);
                // Blocks really contain their positions.
                let move_lf = index.tables().move_lf();
                prop_assert_eq!(move_lf.interval_of(next.lo), next.lo_block);
                prop_assert_eq!(move_lf.interval_of(next.hi), next.hi_block);
                let move_sa = index.tables().move_sa();
                prop_assert_eq!(move_sa.interval_of(next.sa_lo), next.sa_lo_block);
                cur = next;
            }
        }
    }
}
