//! A compressed full-text index over the run-length Burrows-Wheeler transform.
//!
//! The index stores a text of length `n` in space proportional to `r`, the
//! number of runs in its BWT, and answers queries by stepping through *move
//! data structures*: balanced disjoint interval sequences on which the LF
//! mapping, its inverse FL, and the suffix-array successor function phi⁻¹
//! are evaluated in constant time per step.
//!
//! Supported operations:
//!
//! * [`OptBwtrIndex::count`] / [`OptBwtrIndex::locate`] — pattern counting
//!   and location via backward search on balanced sa-intervals,
//! * [`ExtractIndex::extract`] — substring extraction from bookmarked
//!   positions, and [`decompress`] — full text recovery,
//! * [`CompactTrie::prefix_locate`] / [`CompactTrie::prefix_count`] —
//!   prefix search over a string dictionary with trie edge labels streamed
//!   from the compressed text,
//! * [`save`] / [`load`] — a versioned, checksummed on-disk format.
//!
//! Positions, ranks, and interval indexes are 1-based throughout the public
//! API, matching the usual convention for suffix arrays.
//!
//! ```
//! use optbwtr::{OptBwtrIndex, Text};
//!
//! let text = Text::from_bytes(b"baababaabaabab").unwrap();
//! let index = OptBwtrIndex::build(&text);
//! assert_eq!(index.count(b"ab"), 5);
//! let mut hits = index.locate(b"bab");
//! hits.sort_unstable();
//! assert_eq!(hits, vec![4, 12]);
//! ```

pub mod bwt;
pub mod extract;
pub mod index;
pub mod move_structure;
pub mod oracle;
pub mod serialize;
pub mod stats;
pub mod tables;
pub mod trie;

pub use bwt::{build_suffix_array, Rlbwt, RlbwtError, Run, SuffixArray, Text, TextError, SENTINEL};
pub use extract::{decompress, ExtractError, ExtractIndex};
pub use index::{toehold_refine, BalancedSaInterval, OptBwtrIndex, RankSelect, SaSamples, Toehold};
pub use move_structure::{
    DisjointIntervalSequence, MoveResult, MoveStructure, SequenceViolation,
};
pub use serialize::{load, save, IndexFile, LoadError};
pub use tables::{
    build_fl_intervals, build_lf_intervals, build_sa_intervals, MoveTables, TablesError,
};
pub use trie::{CompactTrie, Dictionary, DictionaryError, TERMINATOR};

/// Compiles the code blocks of the workspace README as doctests, so the
/// documented examples cannot drift from the library.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
