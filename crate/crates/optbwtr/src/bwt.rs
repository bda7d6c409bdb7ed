//! Text representation, suffix array construction, and the run-length BWT.
//!
//! A [`Text`] always ends with a unique [`SENTINEL`] byte that is strictly
//! smaller than every other symbol; the remaining symbols may be any bytes
//! in `1..=255`. The suffix array is built by prefix doubling, the BWT is
//! read off the suffix array, and [`Rlbwt`] stores the BWT as maximal runs.

use thiserror::Error;

/// Sentinel byte terminating every text: unique and smaller than all symbols.
pub const SENTINEL: u8 = 0;

/// Errors raised while ingesting text bytes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    /// The input contained the reserved sentinel byte at this 1-based offset.
    #[error("input contains the reserved sentinel byte at offset {offset}")]
    EmbeddedSentinel { offset: usize },
    /// A supposedly terminated buffer did not end with the sentinel.
    #[error("terminated buffer does not end with the sentinel byte")]
    MissingSentinel,
    /// A terminated buffer was empty.
    #[error("terminated buffer is empty")]
    Empty,
}

/// A sentinel-terminated text over the byte alphabet.
///
/// `len()` counts the sentinel, so it is always at least 1. Symbol access is
/// 1-based: `symbol(1)` is the first byte and `symbol(len())` the sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Text {
    bytes: Vec<u8>,
}

impl Text {
    /// Wrap raw bytes, appending the sentinel. Fails if the input already
    /// contains the sentinel byte anywhere.
    pub fn from_bytes(raw: &[u8]) -> Result<Self, TextError> {
        if let Some(at) = raw.iter().position(|&b| b == SENTINEL) {
            return Err(TextError::EmbeddedSentinel { offset: at + 1 });
        }
        let mut bytes = Vec::with_capacity(raw.len() + 1);
        bytes.extend_from_slice(raw);
        bytes.push(SENTINEL);
        Ok(Text { bytes })
    }

    /// Wrap an already-terminated buffer: the last byte must be the sentinel
    /// and no earlier byte may be.
    pub fn from_terminated(bytes: Vec<u8>) -> Result<Self, TextError> {
        match bytes.last() {
            None => return Err(TextError::Empty),
            Some(&b) if b != SENTINEL => return Err(TextError::MissingSentinel),
            _ => {}
        }
        if let Some(at) = bytes[..bytes.len() - 1].iter().position(|&b| b == SENTINEL) {
            return Err(TextError::EmbeddedSentinel { offset: at + 1 });
        }
        Ok(Text { bytes })
    }

    /// Total length `n`, sentinel included.
    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    /// The symbol at 1-based position `pos`.
    pub fn symbol(&self, pos: usize) -> u8 {
        self.bytes[pos - 1]
    }

    /// All bytes, sentinel included.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// The text body without its trailing sentinel.
    pub fn without_sentinel(&self) -> &[u8] {
        &self.bytes[..self.bytes.len() - 1]
    }

    /// Number of distinct symbols, sentinel included.
    pub fn sigma(&self) -> usize {
        let mut seen = [false; 256];
        for &b in &self.bytes {
            seen[b as usize] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }
}

/// The suffix array of a text: `position(i)` is the 1-based starting
/// position of the lexicographically `i`-th suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixArray {
    positions: Vec<usize>,
}

impl SuffixArray {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Starting position of the suffix with 1-based rank `rank`.
    pub fn position(&self, rank: usize) -> usize {
        self.positions[rank - 1]
    }

    /// All positions in rank order (1-based values).
    pub fn as_slice(&self) -> &[usize] {
        &self.positions
    }
}

/// Build the suffix array by prefix doubling: ranks are refined with pairs
/// `(rank[i], rank[i + step])` of doubling step widths until all suffixes
/// have distinct ranks. Runs in `O(n log^2 n)` with no extra assumptions on
/// the alphabet; the unique sentinel guarantees termination.
pub fn build_suffix_array(text: &Text) -> SuffixArray {
    let bytes = text.bytes();
    let n = bytes.len();
    let mut rank: Vec<u32> = bytes.iter().map(|&b| b as u32).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut next_rank = vec![0u32; n];

    let mut step = 1usize;
    loop {
        // Key of suffix i: current rank plus the rank `step` positions ahead,
        // with suffixes running past the end sorting first.
        let key = |i: u32| -> u64 {
            let hi = rank[i as usize] as u64;
            let lo = match rank.get(i as usize + step) {
                Some(&r) => r as u64 + 1,
                None => 0,
            };
            (hi << 32) | lo
        };
        order.sort_unstable_by_key(|&i| key(i));

        next_rank[order[0] as usize] = 0;
        for w in 1..n {
            let bump = (key(order[w]) != key(order[w - 1])) as u32;
            next_rank[order[w] as usize] = next_rank[order[w - 1] as usize] + bump;
        }
        std::mem::swap(&mut rank, &mut next_rank);

        if rank[order[n - 1] as usize] as usize == n - 1 {
            break;
        }
        step *= 2;
    }

    SuffixArray {
        positions: order.iter().map(|&i| i as usize + 1).collect(),
    }
}

/// Read the BWT off a suffix array: entry `i` is the symbol preceding the
/// `i`-th smallest suffix, wrapping to the sentinel for the full suffix.
pub fn bwt_from_sa(text: &Text, sa: &SuffixArray) -> Vec<u8> {
    sa.as_slice()
        .iter()
        .map(|&pos| {
            if pos == 1 {
                text.symbol(text.len())
            } else {
                text.symbol(pos - 1)
            }
        })
        .collect()
}

/// Errors raised while assembling a run-length BWT from raw runs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RlbwtError {
    #[error("run starts must be strictly increasing from 1 (violated at run {run})")]
    BadRunStarts { run: usize },
    #[error("adjacent runs {run} and {next} carry the same symbol", next = run + 1)]
    AdjacentRunsEqual { run: usize },
    #[error("the BWT must contain exactly one sentinel run of length 1")]
    BadSentinelRun,
    #[error("declared length {len} does not cover the last run start {start}")]
    LengthMismatch { len: usize, start: usize },
}

/// One maximal run of the BWT: `symbol` repeated from 1-based `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub symbol: u8,
    pub start: usize,
}

/// A BWT stored as its maximal runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rlbwt {
    runs: Vec<Run>,
    n: usize,
}

impl Rlbwt {
    /// Run-length encode a BWT string.
    pub fn encode(bwt: &[u8]) -> Rlbwt {
        assert!(!bwt.is_empty(), "cannot encode an empty BWT");
        let mut runs = Vec::new();
        for (at, &symbol) in bwt.iter().enumerate() {
            if runs.last().map(|r: &Run| r.symbol) != Some(symbol) {
                runs.push(Run {
                    symbol,
                    start: at + 1,
                });
            }
        }
        Rlbwt { runs, n: bwt.len() }
    }

    /// Assemble from explicit runs, enforcing the structural invariants:
    /// strictly increasing starts beginning at 1, maximal runs (adjacent
    /// symbols differ), and exactly one sentinel run of length 1.
    pub fn from_runs(runs: Vec<Run>, n: usize) -> Result<Rlbwt, RlbwtError> {
        if runs.is_empty() || runs[0].start != 1 {
            return Err(RlbwtError::BadRunStarts { run: 1 });
        }
        for x in 1..runs.len() {
            if runs[x].start <= runs[x - 1].start {
                return Err(RlbwtError::BadRunStarts { run: x + 1 });
            }
            if runs[x].symbol == runs[x - 1].symbol {
                return Err(RlbwtError::AdjacentRunsEqual { run: x });
            }
        }
        let last_start = runs[runs.len() - 1].start;
        if last_start > n {
            return Err(RlbwtError::LengthMismatch {
                len: n,
                start: last_start,
            });
        }
        let built = Rlbwt { runs, n };
        let mut sentinel_runs = 0;
        for x in 1..=built.num_runs() {
            if built.run_symbol(x) == SENTINEL {
                sentinel_runs += 1;
                if built.run_len(x) != 1 {
                    return Err(RlbwtError::BadSentinelRun);
                }
            }
        }
        if sentinel_runs != 1 {
            return Err(RlbwtError::BadSentinelRun);
        }
        Ok(built)
    }

    /// Expand back to the plain BWT string.
    pub fn decode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.n);
        for x in 1..=self.num_runs() {
            out.extend(std::iter::repeat(self.run_symbol(x)).take(self.run_len(x)));
        }
        out
    }

    /// BWT length `n`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of runs `r`.
    pub fn num_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    /// Symbol of the 1-based run `x`.
    pub fn run_symbol(&self, x: usize) -> u8 {
        self.runs[x - 1].symbol
    }

    /// Starting position of the 1-based run `x`.
    pub fn run_start(&self, x: usize) -> usize {
        self.runs[x - 1].start
    }

    /// Last position of the 1-based run `x`.
    pub fn run_end(&self, x: usize) -> usize {
        if x == self.runs.len() {
            self.n
        } else {
            self.runs[x].start - 1
        }
    }

    /// Length of the 1-based run `x`.
    pub fn run_len(&self, x: usize) -> usize {
        self.run_end(x) - self.run_start(x) + 1
    }

    /// The run containing 1-based BWT position `i`, or `None` when `i` is
    /// out of range. Binary search over the run starts.
    pub fn run_of_position(&self, i: usize) -> Option<usize> {
        if i == 0 || i > self.n {
            return None;
        }
        let after = self.runs.partition_point(|r| r.start <= i);
        Some(after)
    }
}
