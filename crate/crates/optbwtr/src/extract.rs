//! Bookmarked text extraction and decompression.
//!
//! An [`ExtractIndex`] preprocesses a set of marked text positions so the
//! text starting at any mark streams out at one move query plus one table
//! lookup per character. The walk runs over the FL move structure — the
//! inverse of LF — which advances one text position per step. The
//! character at the current row is the row's first-column symbol, which is
//! constant on every FL input interval, so a small per-interval character
//! table replaces the text itself.
//!
//! Whole-text decompression is the special case of one mark at position 1
//! extracted to the end.

use crate::bwt::{Rlbwt, Text};
use crate::move_structure::MoveStructure;
use crate::stats;
use crate::tables::{build_fl_intervals, build_lf_intervals, run_order, MoveTables, TablesError};

/// Errors from building an [`ExtractIndex`] or extracting from one.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    /// A mark lies outside the text range.
    #[error("mark {value} at entry {index} is outside the text range 1..={n}")]
    MarkOutOfRange { index: usize, value: usize, n: usize },
    /// Marks must be strictly increasing.
    #[error("marks must be strictly increasing: entry {index} does not exceed its predecessor")]
    MarksNotIncreasing { index: usize },
    /// No mark with the requested index exists.
    #[error("no mark with index {index}: the index holds {count} marks")]
    UnknownMark { index: usize, count: usize },
    /// The requested length runs past the end of the text (or is zero).
    #[error("length {requested} is outside the permitted range 1..={max} for this mark")]
    LengthOutOfRange { requested: usize, max: usize },
}

/// Streamed access to the text from each of a fixed set of marked
/// positions. Owns a balanced FL move structure, the per-interval
/// first-column characters, and one precomputed anchor row per mark.
#[derive(Debug, Clone)]
pub struct ExtractIndex {
    /// First-column character of each unbalanced FL input interval; one
    /// entry per BWT run.
    interval_chars: Vec<u8>,
    /// Balanced FL move structure.
    move_fl: MoveStructure,
    /// For each balanced FL interval, the unbalanced interval containing
    /// its start — the key into `interval_chars`.
    parent_interval: Vec<usize>,
    /// The marked text positions, strictly increasing.
    marks: Vec<usize>,
    /// Per mark: the row whose sa-value is the mark, and the balanced FL
    /// interval containing that row.
    anchors: Vec<(usize, usize)>,
}

impl ExtractIndex {
    /// Preprocess `marks` (strictly increasing text positions) against the
    /// tables of one text. The anchors come from a single FL walk of
    /// `max(marks)` move queries starting at the sentinel row.
    pub fn build(
        rlbwt: &Rlbwt,
        tables: &MoveTables,
        marks: Vec<usize>,
    ) -> Result<ExtractIndex, ExtractError> {
        let n = tables.domain();
        validate_marks(&marks, n)?;
        let move_fl = tables.move_fl().clone();
        let (interval_chars, parent_interval) = derived_arrays(rlbwt, &move_fl);

        // Row 1 holds sa-value n; after x FL steps the row holds sa-value
        // x. Capture the row at every step index that is a mark.
        let mut anchors = Vec::with_capacity(marks.len());
        if let Some(&last) = marks.last() {
            let mut pos = 1usize;
            let mut block = move_fl.interval_of(1);
            let mut next = 0usize;
            for step in 1..=last {
                let moved = move_fl.query(pos, block);
                pos = moved.position;
                block = moved.interval;
                if marks[next] == step {
                    anchors.push((pos, block));
                    next += 1;
                }
            }
        }
        Ok(ExtractIndex {
            interval_chars,
            move_fl,
            parent_interval,
            marks,
            anchors,
        })
    }

    /// Text length, sentinel included.
    pub fn text_len(&self) -> usize {
        self.move_fl.domain()
    }

    /// The marked positions, strictly increasing.
    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    /// Longest extraction possible from mark `j`: to the end of the text.
    pub fn max_len(&self, j: usize) -> Result<usize, ExtractError> {
        if j == 0 || j > self.marks.len() {
            return Err(ExtractError::UnknownMark {
                index: j,
                count: self.marks.len(),
            });
        }
        Ok(self.text_len() - self.marks[j - 1] + 1)
    }

    /// The `d` text characters starting at mark `j` (1-based mark index):
    /// exactly `d - 1` move queries and `d` character lookups.
    pub fn extract(&self, j: usize, d: usize) -> Result<Vec<u8>, ExtractError> {
        let max = self.max_len(j)?;
        if d == 0 || d > max {
            return Err(ExtractError::LengthOutOfRange { requested: d, max });
        }
        let (mut pos, mut block) = self.anchors[j - 1];
        let mut out = Vec::with_capacity(d);
        out.push(self.char_at(block));
        for _ in 1..d {
            let moved = self.move_fl.query(pos, block);
            pos = moved.position;
            block = moved.interval;
            out.push(self.char_at(block));
        }
        stats::record_chars(d as u64);
        Ok(out)
    }

    fn char_at(&self, block: usize) -> u8 {
        self.interval_chars[self.parent_interval[block - 1] - 1]
    }

    pub fn move_fl(&self) -> &MoveStructure {
        &self.move_fl
    }

    pub fn anchors(&self) -> &[(usize, usize)] {
        &self.anchors
    }

    pub fn interval_chars(&self) -> &[u8] {
        &self.interval_chars
    }

    pub fn parent_intervals(&self) -> &[usize] {
        &self.parent_interval
    }

    /// Rebuild from persisted parts. The caller must already have checked
    /// that the marks are valid for the domain of `move_fl` and that
    /// `anchor_positions` has one in-range entry per mark; the derived
    /// character tables and anchor intervals are recomputed from `rlbwt`.
    pub(crate) fn reassemble(
        rlbwt: &Rlbwt,
        move_fl: MoveStructure,
        marks: Vec<usize>,
        anchor_positions: &[usize],
    ) -> ExtractIndex {
        debug_assert_eq!(marks.len(), anchor_positions.len());
        let (interval_chars, parent_interval) = derived_arrays(rlbwt, &move_fl);
        let anchors = anchor_positions
            .iter()
            .map(|&p| (p, move_fl.interval_of(p)))
            .collect();
        ExtractIndex {
            interval_chars,
            move_fl,
            parent_interval,
            marks,
            anchors,
        }
    }
}

pub(crate) fn validate_marks(marks: &[usize], n: usize) -> Result<(), ExtractError> {
    for (at, &m) in marks.iter().enumerate() {
        if m == 0 || m > n {
            return Err(ExtractError::MarkOutOfRange {
                index: at + 1,
                value: m,
                n,
            });
        }
        if at > 0 && marks[at - 1] >= m {
            return Err(ExtractError::MarksNotIncreasing { index: at + 1 });
        }
    }
    Ok(())
}

/// The two lookup tables mapping a balanced FL interval to its character:
/// per unbalanced FL interval the first-column character (one per run, in
/// first-column order), and per balanced interval its unbalanced parent.
fn derived_arrays(rlbwt: &Rlbwt, move_fl: &MoveStructure) -> (Vec<u8>, Vec<usize>) {
    let order = run_order(rlbwt);
    let interval_chars: Vec<u8> = order.iter().map(|&x| rlbwt.run_symbol(x)).collect();
    let unbalanced = build_fl_intervals(&build_lf_intervals(rlbwt));
    let starts: Vec<usize> = unbalanced.pairs().iter().map(|&(p, _)| p).collect();
    let parent_interval: Vec<usize> = move_fl
        .pairs()
        .iter()
        .map(|&(p, _)| starts.partition_point(|&s| s <= p))
        .collect();
    (interval_chars, parent_interval)
}

/// Recover the full text, sentinel included, from its run-length BWT by
/// extracting from a single mark at position 1. Fails only when the runs
/// are not the BWT of any text.
pub fn decompress(rlbwt: &Rlbwt) -> Result<Text, TablesError> {
    let tables = MoveTables::build(rlbwt)?;
    let index =
        ExtractIndex::build(rlbwt, &tables, vec![1]).expect("mark 1 is valid for any text");
    let bytes = index
        .extract(1, rlbwt.len())
        .expect("the whole text length is always permitted from mark 1");
    Ok(Text::from_terminated(bytes).expect("a full LF cycle puts the sentinel last"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bwt::{build_suffix_array, bwt_from_sa, Run, SENTINEL};
    use crate::oracle;
    use proptest::prelude::*;

    const EXAMPLE_TEXT: &[u8] = b"baababaabaabab";

    fn example_parts() -> (Rlbwt, MoveTables) {
        let t = Text::from_bytes(EXAMPLE_TEXT).unwrap();
        let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
        let tables = MoveTables::build(&rlbwt).unwrap();
        (rlbwt, tables)
    }

    #[test]
    fn example_anchor_row() {
        let (rlbwt, tables) = example_parts();
        let index = ExtractIndex::build(&rlbwt, &tables, vec![1]).unwrap();
        // The row holding sa-value 1 is row 13, inside FL interval 4.
        assert_eq!(index.anchors(), &[(13, 4)]);
        assert_eq!(index.interval_chars(), b"\0aab");
        assert_eq!(index.parent_intervals(), &[1, 2, 3, 4]);
    }

    #[test]
    fn example_extract_windows() {
        let (rlbwt, tables) = example_parts();
        let index = ExtractIndex::build(&rlbwt, &tables, vec![1, 3, 7]).unwrap();
        let mut full = EXAMPLE_TEXT.to_vec();
        full.push(SENTINEL);
        assert_eq!(index.extract(1, 15).unwrap(), full);
        assert_eq!(index.extract(1, 1).unwrap(), b"b");
        assert_eq!(index.extract(1, 14).unwrap(), EXAMPLE_TEXT);
        assert_eq!(index.extract(2, 5).unwrap(), b"ababa");
        assert_eq!(index.extract(3, 4).unwrap(), b"aaba");
        assert_eq!(index.max_len(2), Ok(13));
    }

    #[test]
    fn extract_argument_errors() {
        let (rlbwt, tables) = example_parts();
        let index = ExtractIndex::build(&rlbwt, &tables, vec![4]).unwrap();
        assert_eq!(
            index.extract(0, 1),
            Err(ExtractError::UnknownMark { index: 0, count: 1 })
        );
        assert_eq!(
            index.extract(2, 1),
            Err(ExtractError::UnknownMark { index: 2, count: 1 })
        );
        assert_eq!(
            index.extract(1, 13),
            Err(ExtractError::LengthOutOfRange {
                requested: 13,
                max: 12
            })
        );
        assert_eq!(
            index.extract(1, 0),
            Err(ExtractError::LengthOutOfRange {
                requested: 0,
                max: 12
            })
        );
        assert_eq!(index.extract(1, 12).unwrap().len(), 12);
    }

    #[test]
    fn build_rejects_bad_marks() {
        let (rlbwt, tables) = example_parts();
        assert_eq!(
            ExtractIndex::build(&rlbwt, &tables, vec![0]).unwrap_err(),
            ExtractError::MarkOutOfRange {
                index: 1,
                value: 0,
                n: 15
            }
        );
        assert_eq!(
            ExtractIndex::build(&rlbwt, &tables, vec![2, 16]).unwrap_err(),
            ExtractError::MarkOutOfRange {
                index: 2,
                value: 16,
                n: 15
            }
        );
        assert_eq!(
            ExtractIndex::build(&rlbwt, &tables, vec![3, 3]).unwrap_err(),
            ExtractError::MarksNotIncreasing { index: 2 }
        );
        assert_eq!(
            ExtractIndex::build(&rlbwt, &tables, vec![5, 2]).unwrap_err(),
            ExtractError::MarksNotIncreasing { index: 2 }
        );
    }

    #[test]
    fn empty_marks_build_a_valid_index() {
        let (rlbwt, tables) = example_parts();
        let index = ExtractIndex::build(&rlbwt, &tables, vec![]).unwrap();
        assert!(index.anchors().is_empty());
        assert_eq!(
            index.extract(1, 1),
            Err(ExtractError::UnknownMark { index: 1, count: 0 })
        );
    }

    #[test]
    fn per_character_cost_is_exact() {
        let (rlbwt, tables) = example_parts();
        let index = ExtractIndex::build(&rlbwt, &tables, vec![2, 9]).unwrap();
        for (j, d) in [(1usize, 1usize), (1, 8), (2, 7), (1, 14)] {
            stats::reset();
            index.extract(j, d).unwrap();
            let counts = stats::snapshot();
            assert_eq!(counts.move_queries, (d - 1) as u64, "moves for d = {d}");
            assert_eq!(counts.chars_emitted, d as u64, "chars for d = {d}");
            assert_eq!(counts.rank_calls, 0);
        }
    }

    #[test]
    fn example_decompress() {
        let rlbwt = Rlbwt::from_runs(
            vec![
                Run { symbol: b'b', start: 1 },
                Run { symbol: b'a', start: 7 },
                Run { symbol: SENTINEL, start: 13 },
                Run { symbol: b'a', start: 14 },
            ],
            15,
        )
        .unwrap();
        let text = decompress(&rlbwt).unwrap();
        assert_eq!(text.without_sentinel(), EXAMPLE_TEXT);
    }

    #[test]
    fn sentinel_only_round_trip() {
        let t = Text::from_bytes(b"").unwrap();
        let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
        assert_eq!(decompress(&rlbwt).unwrap(), t);
        let tables = MoveTables::build(&rlbwt).unwrap();
        let index = ExtractIndex::build(&rlbwt, &tables, vec![1]).unwrap();
        assert_eq!(index.extract(1, 1).unwrap(), &[SENTINEL]);
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
        fn every_window_matches_slicing(raw in arb_text(120)) {
            let t = Text::from_bytes(&raw).unwrap();
            let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
            let tables = MoveTables::build(&rlbwt).unwrap();
            let n = t.len();
            // Every position marked: every (j, d) window checked.
            let index = ExtractIndex::build(&rlbwt, &tables, (1..=n).collect()).unwrap();
            for j in 1..=n {
                for d in 1..=(n - j + 1) {
                    prop_assert_eq!(index.extract(j, d).unwrap(), &t.bytes()[j - 1..j - 1 + d]);
                }
            }
        }

        #[test]
        fn first_column_reconstruction(raw in arb_text(200)) {
            // Repeating each unbalanced interval's character across its
            // width rebuilds the sorted first column.
            let t = Text::from_bytes(&raw).unwrap();
            let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
            let unbalanced = build_fl_intervals(&build_lf_intervals(&rlbwt));
            let order = run_order(&rlbwt);
            let mut rebuilt = Vec::with_capacity(t.len());
            for (y, &run) in order.iter().enumerate() {
                let width = unbalanced.width(y + 1);
                rebuilt.extend(std::iter::repeat(rlbwt.run_symbol(run)).take(width));
            }
            let naive = oracle::build(&t);
            prop_assert_eq!(rebuilt, naive.first_column);
        }

        #[test]
        fn decompression_round_trips(raw in arb_text(300)) {
            let t = Text::from_bytes(&raw).unwrap();
            let rlbwt = Rlbwt::encode(&bwt_from_sa(&t, &build_suffix_array(&t)));
            prop_assert_eq!(decompress(&rlbwt).unwrap(), t);
        }
    }
}
