//! Brute-force reference implementations used to cross-check the index.
//!
//! Everything here is computed straight from definitions — suffixes are
//! sorted by direct comparison, mapping tables are tabulated in full, and
//! pattern matching scans the text. None of it shares logic with the
//! production code paths, which is the point: tests compare the two sides.

use crate::bwt::Text;

/// Fully tabulated mappings for one text, all 1-based.
#[derive(Debug, Clone)]
pub struct OracleTables {
    /// Suffix array: `sa[i-1]` is the start of the rank-`i` suffix.
    pub sa: Vec<usize>,
    /// Inverse suffix array: `rank_of[p-1]` is the rank of the suffix at `p`.
    pub rank_of: Vec<usize>,
    /// The BWT string.
    pub bwt: Vec<u8>,
    /// `lf[i-1]` is the rank of the suffix starting one position before
    /// `sa[i-1]` (wrapping the full suffix to the sentinel row).
    pub lf: Vec<usize>,
    /// `fl[i-1]` inverts `lf`.
    pub fl: Vec<usize>,
    /// `phi_inv[s-1]` is the sa-value following `s` in rank order, with the
    /// last rank wrapping to the first.
    pub phi_inv: Vec<usize>,
    /// First column of the sorted rotations: `first_column[i-1] = T[sa[i-1]]`.
    pub first_column: Vec<u8>,
    /// `smaller_counts[c]` counts text symbols strictly smaller than `c`.
    pub smaller_counts: Vec<usize>,
}

/// Tabulate every mapping for `text` by brute force.
pub fn build(text: &Text) -> OracleTables {
    let bytes = text.bytes();
    let n = bytes.len();

    let mut sa: Vec<usize> = (1..=n).collect();
    sa.sort_by(|&a, &b| bytes[a - 1..].cmp(&bytes[b - 1..]));

    let mut rank_of = vec![0usize; n];
    for (rank0, &pos) in sa.iter().enumerate() {
        rank_of[pos - 1] = rank0 + 1;
    }

    let bwt: Vec<u8> = sa
        .iter()
        .map(|&pos| if pos == 1 { bytes[n - 1] } else { bytes[pos - 2] })
        .collect();

    let mut smaller_counts = vec![0usize; 257];
    for &b in bytes {
        smaller_counts[b as usize + 1] += 1;
    }
    for c in 1..257 {
        smaller_counts[c] += smaller_counts[c - 1];
    }
    smaller_counts.truncate(256);

    // LF from its definition: C[c] plus the rank of this occurrence of c
    // within the BWT prefix ending at i.
    let mut lf = vec![0usize; n];
    let mut seen = vec![0usize; 256];
    for i in 1..=n {
        let c = bwt[i - 1] as usize;
        seen[c] += 1;
        lf[i - 1] = smaller_counts[c] + seen[c];
    }

    let mut fl = vec![0usize; n];
    for i in 1..=n {
        fl[lf[i - 1] - 1] = i;
    }

    // phi_inv maps each sa-value to its successor in rank order; the value
    // at the last rank wraps around to the value at the first.
    let mut phi_inv = vec![0usize; n];
    for rank in 1..=n {
        let next = if rank == n { 1 } else { rank + 1 };
        phi_inv[sa[rank - 1] - 1] = sa[next - 1];
    }

    let first_column = sa.iter().map(|&pos| bytes[pos - 1]).collect();

    OracleTables {
        sa,
        rank_of,
        bwt,
        lf,
        fl,
        phi_inv,
        first_column,
        smaller_counts,
    }
}

/// All 1-based positions where `pattern` occurs in the text body (the text
/// without its sentinel), by direct scanning. The empty pattern matches at
/// every position `1..=n`, the boundary position included.
pub fn occurrences(text: &Text, pattern: &[u8]) -> Vec<usize> {
    let n = text.len();
    let m = pattern.len();
    if m == 0 {
        return (1..=n).collect();
    }
    if m > n - 1 {
        return Vec::new();
    }
    let body = text.without_sentinel();
    (1..=body.len().saturating_sub(m) + 1)
        .filter(|&i| &body[i - 1..i - 1 + m] == pattern)
        .collect()
}

/// The sa-interval `[lo, hi]` of suffixes starting with `pattern`, found by
/// binary search over the sorted suffixes, or `None` when absent.
pub fn sa_interval(text: &Text, tables: &OracleTables, pattern: &[u8]) -> Option<(usize, usize)> {
    let bytes = text.bytes();
    // Compare the length-|pattern| prefix of the rank-r suffix against the
    // pattern; this ordering is monotone in r.
    let prefix_cmp = |rank: usize| -> std::cmp::Ordering {
        let suffix = &bytes[tables.sa[rank - 1] - 1..];
        let head = &suffix[..pattern.len().min(suffix.len())];
        head.cmp(pattern)
    };
    let ranks: Vec<usize> = (1..=bytes.len()).collect();
    let below = ranks.partition_point(|&r| prefix_cmp(r) == std::cmp::Ordering::Less);
    let not_above = ranks.partition_point(|&r| prefix_cmp(r) != std::cmp::Ordering::Greater);
    if below == not_above {
        None
    } else {
        Some((below + 1, not_above))
    }
}

/// Count of symbol `c` among the first `prefix` entries of `s`, by scanning.
pub fn rank_scan(s: &[u8], c: u8, prefix: usize) -> usize {
    s[..prefix].iter().filter(|&&b| b == c).count()
}

/// 1-based position of the `nth` occurrence of `c` in `s`, by scanning.
pub fn select_scan(s: &[u8], c: u8, nth: usize) -> Option<usize> {
    s.iter()
        .enumerate()
        .filter(|&(_, &b)| b == c)
        .nth(nth.checked_sub(1)?)
        .map(|(at, _)| at + 1)
}

/// 1-based indexes of the dictionary strings having `pattern` as a prefix.
pub fn prefix_matches(strings: &[Vec<u8>], pattern: &[u8]) -> Vec<usize> {
    strings
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() >= pattern.len() && &s[..pattern.len()] == pattern)
        .map(|(at, _)| at + 1)
        .collect()
}
