//! Versioned, checksummed binary persistence for built indexes.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! magic      4 bytes  "OBTR"
//! version    u32      currently 1
//! flags      u32      bit 0 search, bit 1 extract, bit 2 prefix
//! n          u64      text length, sentinel included
//! r          u64      number of BWT runs
//! sections             run-length BWT (always), then one section per set
//!                      flag bit, ascending; each section is a u64 byte
//!                      length followed by exactly that many payload bytes
//! checksum   u32      CRC-32 of every preceding byte
//! ```
//!
//! Saving is deterministic: the same index always produces the same bytes,
//! and `save ∘ load ∘ save` is byte-identical. Loading re-derives every
//! table that follows cheaply from the stored ones (run orders, character
//! tables, rank/select occurrence lists, interval memberships) and
//! cross-checks the redundant stored structures against recomputation, so
//! a file that loads successfully is internally consistent. The expensive
//! whole-text walks behind the suffix-array samples and anchors are the
//! parts that are trusted from the file rather than recomputed; they are
//! range- and shape-validated.

use std::io::{Read, Write};

use crate::bwt::{Rlbwt, Run, SENTINEL};
use crate::extract::{validate_marks, ExtractIndex};
use crate::index::{OptBwtrIndex, RankSelect, SaSamples};
use crate::move_structure::MoveStructure;
use crate::tables::{build_fl_intervals, build_lf_intervals, run_order, MoveTables};
use crate::trie::{CompactTrie, Edge, Node};

const MAGIC: &[u8; 4] = b"OBTR";
const VERSION: u32 = 1;
const FLAG_SEARCH: u32 = 1;
const FLAG_EXTRACT: u32 = 1 << 1;
const FLAG_PREFIX: u32 = 1 << 2;
const FLAGS_KNOWN: u32 = FLAG_SEARCH | FLAG_EXTRACT | FLAG_PREFIX;

/// Errors from [`load`]. Each failure mode is reported distinctly.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an index file: bad magic")]
    BadMagic,
    #[error("unsupported format version {found}")]
    UnsupportedVersion { found: u32 },
    #[error("file ends inside a declared structure")]
    Truncated,
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed index file: {detail}")]
    Malformed { detail: String },
}

fn malformed(detail: impl Into<String>) -> LoadError {
    LoadError::Malformed {
        detail: detail.into(),
    }
}

/// A saved or loaded index file: the run-length BWT plus whichever query
/// structures were built. All present structures must describe the same
/// text as `rlbwt`.
#[derive(Debug, Clone)]
pub struct IndexFile {
    pub rlbwt: Rlbwt,
    pub search: Option<OptBwtrIndex>,
    pub extract: Option<ExtractIndex>,
    pub prefix: Option<CompactTrie>,
}

impl IndexFile {
    fn flags(&self) -> u32 {
        let mut flags = 0;
        if self.search.is_some() {
            flags |= FLAG_SEARCH;
        }
        if self.extract.is_some() {
            flags |= FLAG_EXTRACT;
        }
        if self.prefix.is_some() {
            flags |= FLAG_PREFIX;
        }
        flags
    }
}

/// Serialize `file` into `sink`; returns the number of bytes written.
/// Deterministic: equal indexes produce equal bytes.
pub fn save<W: Write>(file: &IndexFile, sink: &mut W) -> std::io::Result<usize> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, file.flags());
    put_u64(&mut out, file.rlbwt.len() as u64);
    put_u64(&mut out, file.rlbwt.num_runs() as u64);

    put_section(&mut out, |buf| put_rlbwt(buf, &file.rlbwt));
    if let Some(search) = &file.search {
        debug_assert_eq!(search.rlbwt(), &file.rlbwt, "search index text mismatch");
        put_section(&mut out, |buf| put_search(buf, search));
    }
    if let Some(extract) = &file.extract {
        put_section(&mut out, |buf| put_extract(buf, extract));
    }
    if let Some(prefix) = &file.prefix {
        put_section(&mut out, |buf| put_prefix(buf, prefix));
    }

    let checksum = crc32fast::hash(&out);
    put_u32(&mut out, checksum);
    sink.write_all(&out)?;
    Ok(out.len())
}

/// Read an index file produced by [`save`].
pub fn load<R: Read>(source: &mut R) -> Result<IndexFile, LoadError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;

    if bytes.len() < 4 {
        return Err(LoadError::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(LoadError::BadMagic);
    }
    let mut header = Cursor::new(&bytes[4..]);
    let version = header.u32()?;
    if version != VERSION {
        return Err(LoadError::UnsupportedVersion { found: version });
    }
    let flags = header.u32()?;
    let n = header.usize()?;
    let r = header.usize()?;

    // Walk the declared section lengths before trusting any payload, so
    // physical truncation is reported as such rather than as a checksum
    // failure, then verify the checksum before parsing payload bytes.
    let mut section_walk = header.clone();
    let mut section_count = 1 + (flags & FLAGS_KNOWN).count_ones();
    while section_count > 0 {
        let len = section_walk.u64()?;
        section_walk.skip(len as usize)?;
        section_count -= 1;
    }
    let trailer = section_walk.remaining();
    if trailer < 4 {
        return Err(LoadError::Truncated);
    }
    if trailer > 4 {
        return Err(malformed("trailing bytes after the final section"));
    }
    let body_len = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[body_len..].try_into().expect("four bytes"));
    let computed = crc32fast::hash(&bytes[..body_len]);
    if stored != computed {
        return Err(LoadError::ChecksumMismatch { stored, computed });
    }
    if flags & !FLAGS_KNOWN != 0 {
        return Err(malformed(format!("unknown flag bits {:#x}", flags & !FLAGS_KNOWN)));
    }

    let mut cursor = header;
    let rlbwt = {
        let mut section = cursor.section()?;
        let rlbwt = take_rlbwt(&mut section, n, r)?;
        section.finish("run-length BWT")?;
        rlbwt
    };
    let mut file = IndexFile {
        rlbwt,
        search: None,
        extract: None,
        prefix: None,
    };
    if flags & FLAG_SEARCH != 0 {
        let mut section = cursor.section()?;
        file.search = Some(take_search(&mut section, &file.rlbwt)?);
        section.finish("search")?;
    }
    if flags & FLAG_EXTRACT != 0 {
        let mut section = cursor.section()?;
        let extract = take_extract(&mut section, &file.rlbwt)?;
        if extract.text_len() != n {
            return Err(malformed("extract section built for a different text"));
        }
        file.extract = Some(extract);
        section.finish("extract")?;
    }
    if flags & FLAG_PREFIX != 0 {
        let mut section = cursor.section()?;
        file.prefix = Some(take_prefix(&mut section)?);
        section.finish("prefix")?;
    }
    Ok(file)
}

// ---------------------------------------------------------------------
// Primitive writers.

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_usize(out: &mut Vec<u8>, v: usize) {
    put_u64(out, v as u64);
}

/// Write a section: serialize the payload, then prefix its byte length.
fn put_section(out: &mut Vec<u8>, payload: impl FnOnce(&mut Vec<u8>)) {
    let mut buf = Vec::new();
    payload(&mut buf);
    put_u64(out, buf.len() as u64);
    out.extend_from_slice(&buf);
}

fn put_rlbwt(out: &mut Vec<u8>, rlbwt: &Rlbwt) {
    put_usize(out, rlbwt.num_runs());
    for run in rlbwt.runs() {
        out.push(run.symbol);
        put_usize(out, run.start);
    }
}

fn put_move(out: &mut Vec<u8>, m: &MoveStructure) {
    put_usize(out, m.len());
    for &(p, q) in m.pairs() {
        put_usize(out, p);
        put_usize(out, q);
    }
    for &s in m.scan_starts() {
        put_usize(out, s);
    }
}

fn put_search(out: &mut Vec<u8>, search: &OptBwtrIndex) {
    let tables = search.tables();
    put_move(out, tables.move_lf());
    put_move(out, tables.move_sa());
    put_move(out, tables.move_fl());
    put_usize(out, tables.run_end_samples().len());
    for &u in tables.run_end_samples() {
        put_usize(out, u);
    }
    put_usize(out, search.heads().len());
    out.extend_from_slice(search.heads().symbols());
    for &v in search.samples().values() {
        put_usize(out, v);
    }
    for &b in search.samples().blocks() {
        put_usize(out, b);
    }
}

fn put_extract(out: &mut Vec<u8>, extract: &ExtractIndex) {
    put_usize(out, extract.text_len());
    put_move(out, extract.move_fl());
    put_usize(out, extract.marks().len());
    for &m in extract.marks() {
        put_usize(out, m);
    }
    for &(pos, _) in extract.anchors() {
        put_usize(out, pos);
    }
}

fn put_prefix(out: &mut Vec<u8>, prefix: &CompactTrie) {
    put_usize(out, prefix.num_strings());
    put_usize(out, prefix.concat_rlbwt().len());
    put_rlbwt(out, prefix.concat_rlbwt());
    put_extract(out, prefix.extract_index());
    put_usize(out, prefix.nodes().len());
    for node in prefix.nodes() {
        put_usize(out, node.edges.len());
        for edge in &node.edges {
            out.push(edge.head);
            put_usize(out, edge.mark);
            put_usize(out, edge.len);
            put_usize(out, edge.child);
        }
        put_usize(out, node.indexes.len());
        for &i in &node.indexes {
            put_usize(out, i);
        }
    }
}

// ---------------------------------------------------------------------
// Bounds-checked reader.

#[derive(Clone)]
struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Cursor<'a> {
        Cursor { bytes, at: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.at
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], LoadError> {
        if self.remaining() < len {
            return Err(LoadError::Truncated);
        }
        let slice = &self.bytes[self.at..self.at + len];
        self.at += len;
        Ok(slice)
    }

    fn skip(&mut self, len: usize) -> Result<(), LoadError> {
        self.take(len).map(|_| ())
    }

    fn u8(&mut self) -> Result<u8, LoadError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, LoadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    fn u64(&mut self) -> Result<u64, LoadError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }

    /// A u64 that must fit `usize` (it always does on 64-bit targets).
    fn usize(&mut self) -> Result<usize, LoadError> {
        usize::try_from(self.u64()?).map_err(|_| malformed("value exceeds the address space"))
    }

    /// A u64 length that is about to drive an allocation or loop: reject
    /// anything the remaining bytes cannot possibly back, so crafted
    /// counts cannot balloon memory. `unit` is the minimum encoded size
    /// of one element.
    fn count(&mut self, unit: usize) -> Result<usize, LoadError> {
        let v = self.usize()?;
        if v.saturating_mul(unit) > self.remaining() {
            return Err(LoadError::Truncated);
        }
        Ok(v)
    }

    /// Split off a length-prefixed section as its own cursor.
    fn section(&mut self) -> Result<Cursor<'a>, LoadError> {
        let len = self.u64()? as usize;
        Ok(Cursor::new(self.take(len)?))
    }

    /// Require that a section was consumed exactly.
    fn finish(&self, what: &str) -> Result<(), LoadError> {
        if self.remaining() != 0 {
            return Err(malformed(format!(
                "{what} section declares {} unused trailing bytes",
                self.remaining()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Section readers. Every reader validates what it returns.

fn take_rlbwt(cur: &mut Cursor, n: usize, r: usize) -> Result<Rlbwt, LoadError> {
    let count = cur.count(9)?;
    if count != r {
        return Err(malformed(format!(
            "header promises {r} runs, section stores {count}"
        )));
    }
    let mut runs = Vec::with_capacity(count);
    for _ in 0..count {
        let symbol = cur.u8()?;
        let start = cur.usize()?;
        runs.push(Run { symbol, start });
    }
    Rlbwt::from_runs(runs, n).map_err(|e| malformed(format!("bad runs: {e}")))
}

fn take_move(cur: &mut Cursor, n: usize, what: &str) -> Result<MoveStructure, LoadError> {
    let k = cur.count(16)?;
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let p = cur.usize()?;
        let q = cur.usize()?;
        pairs.push((p, q));
    }
    let mut scan_starts = Vec::with_capacity(k);
    for _ in 0..k {
        scan_starts.push(cur.usize()?);
    }
    let m = MoveStructure::from_parts(pairs, scan_starts, n)
        .map_err(|e| malformed(format!("bad {what} move structure: {e}")))?;
    Ok(m)
}

fn take_search(cur: &mut Cursor, rlbwt: &Rlbwt) -> Result<OptBwtrIndex, LoadError> {
    let n = rlbwt.len();
    let r = rlbwt.num_runs();
    let move_lf = take_move(cur, n, "LF")?;
    let move_sa = take_move(cur, n, "SA")?;
    let move_fl = take_move(cur, n, "FL")?;

    // The LF and FL structures re-derive cheaply from the runs; insist the
    // stored copies agree.
    let expect_lf = MoveStructure::build(&build_lf_intervals(rlbwt));
    if move_lf != expect_lf {
        return Err(malformed("LF move structure disagrees with the runs"));
    }
    let expect_fl = MoveStructure::build(&build_fl_intervals(&build_lf_intervals(rlbwt)));
    if move_fl != expect_fl {
        return Err(malformed("FL move structure disagrees with the runs"));
    }
    if move_sa.len() < r || move_sa.len() > 2 * r {
        return Err(malformed("SA move structure has an impossible size"));
    }

    let sample_count = cur.count(8)?;
    if sample_count != r {
        return Err(malformed("one run-end sample per run is required"));
    }
    let mut run_end_samples = Vec::with_capacity(sample_count);
    for _ in 0..sample_count {
        run_end_samples.push(cur.usize()?);
    }
    let sa_starts: Vec<usize> = move_sa.pairs().iter().map(|&(p, _)| p).collect();
    for (at, &u) in run_end_samples.iter().enumerate() {
        if at > 0 && run_end_samples[at - 1] >= u {
            return Err(malformed("run-end samples are not strictly increasing"));
        }
        if sa_starts.binary_search(&u).is_err() {
            return Err(malformed("run-end sample is not an SA interval start"));
        }
    }

    let head_count = cur.count(1)?;
    if head_count != move_lf.len() {
        return Err(malformed("one head symbol per LF interval is required"));
    }
    let symbols = cur.take(head_count)?.to_vec();
    for (x, &(p, _)) in move_lf.pairs().iter().enumerate() {
        let run = rlbwt.run_of_position(p).expect("starts are in range");
        if symbols[x] != rlbwt.run_symbol(run) {
            return Err(malformed("head symbols disagree with the runs"));
        }
    }

    let mut values = Vec::with_capacity(head_count);
    for _ in 0..head_count {
        values.push(cur.usize()?);
    }
    let mut blocks = Vec::with_capacity(head_count);
    for _ in 0..head_count {
        blocks.push(cur.usize()?);
    }
    for x in 0..head_count {
        let v = values[x];
        if v == 0 || v > n {
            return Err(malformed("sa-value sample out of range"));
        }
        // A row whose symbol is not the sentinel holds a suffix with a
        // predecessor, so its sa-value cannot be 1 — and conversely.
        if (symbols[x] == SENTINEL) != (v == 1) {
            return Err(malformed("sa-value sample inconsistent with its head symbol"));
        }
        if blocks[x] != move_sa.interval_of(v) {
            return Err(malformed("sa-value sample names the wrong interval"));
        }
    }

    let tables = MoveTables::from_parts(
        move_lf,
        move_sa,
        move_fl,
        run_order(rlbwt),
        run_end_samples,
    );
    Ok(OptBwtrIndex::from_parts(
        rlbwt.clone(),
        tables,
        RankSelect::new(symbols),
        SaSamples::from_parts(values, blocks),
    ))
}

fn take_extract(cur: &mut Cursor, rlbwt: &Rlbwt) -> Result<ExtractIndex, LoadError> {
    let domain = cur.usize()?;
    if domain != rlbwt.len() {
        return Err(malformed("extract structure built for a different text length"));
    }
    let move_fl = take_move(cur, domain, "FL")?;
    let expect_fl = MoveStructure::build(&build_fl_intervals(&build_lf_intervals(rlbwt)));
    if move_fl != expect_fl {
        return Err(malformed("FL move structure disagrees with the runs"));
    }
    let mark_count = cur.count(8)?;
    let mut marks = Vec::with_capacity(mark_count);
    for _ in 0..mark_count {
        marks.push(cur.usize()?);
    }
    validate_marks(&marks, domain).map_err(|e| malformed(format!("bad marks: {e}")))?;
    let mut anchors = Vec::with_capacity(mark_count);
    for _ in 0..mark_count {
        let pos = cur.usize()?;
        if pos == 0 || pos > domain {
            return Err(malformed("anchor row out of range"));
        }
        anchors.push(pos);
    }
    Ok(ExtractIndex::reassemble(rlbwt, move_fl, marks, &anchors))
}

fn take_prefix(cur: &mut Cursor) -> Result<CompactTrie, LoadError> {
    let d = cur.usize()?;
    if d == 0 {
        return Err(malformed("a dictionary holds at least one string"));
    }
    let concat_len = cur.usize()?;
    let run_count = {
        // Peek the run count for take_rlbwt's cross-check.
        cur.clone().count(9)?
    };
    let concat_rlbwt = take_rlbwt(cur, concat_len, run_count)?;
    let extract = take_extract(cur, &concat_rlbwt)?;
    let marks = extract.marks();

    let node_count = cur.count(16)?;
    if node_count == 0 || node_count > 2 * d {
        return Err(malformed("impossible trie node count"));
    }
    let mut nodes = Vec::with_capacity(node_count);
    let mut total_indexes = 0usize;
    for _ in 0..node_count {
        let edge_count = cur.count(25)?;
        let mut edges = Vec::with_capacity(edge_count);
        for _ in 0..edge_count {
            let head = cur.u8()?;
            let mark = cur.usize()?;
            let len = cur.usize()?;
            let child = cur.usize()?;
            if mark == 0 || mark > marks.len() {
                return Err(malformed("edge mark out of range"));
            }
            if len == 0 || len > concat_len - marks[mark - 1] + 1 {
                return Err(malformed("edge label runs past the end of the text"));
            }
            if child < 2 || child > node_count {
                return Err(malformed("edge child out of range"));
            }
            edges.push(Edge {
                head,
                mark,
                len,
                child,
            });
        }
        if !edges.windows(2).all(|w| w[0].head < w[1].head) {
            return Err(malformed("edges are not sorted by head byte"));
        }
        let index_count = cur.count(8)?;
        let mut indexes = Vec::with_capacity(index_count);
        for _ in 0..index_count {
            let i = cur.usize()?;
            if i == 0 || i > d {
                return Err(malformed("leaf string index out of range"));
            }
            indexes.push(i);
        }
        if edges.is_empty() == indexes.is_empty() {
            return Err(malformed("a node is either a leaf or has edges, never both"));
        }
        total_indexes += indexes.len();
        nodes.push(Node {
            edges,
            leaf_count: 0,
            first_leaf: 0,
            last_leaf: 0,
            indexes,
        });
    }
    if total_indexes != d {
        return Err(malformed("leaf indexes do not cover the dictionary"));
    }

    // The nodes must form a tree rooted at node 1: every other node has
    // exactly one incoming edge and is reachable from the root.
    let mut seen = vec![false; node_count];
    seen[0] = true;
    let mut stack = vec![1usize];
    let mut visited = 1usize;
    while let Some(id) = stack.pop() {
        let node = &nodes[id - 1];
        if id != 1 && node.edges.len() == 1 {
            return Err(malformed("a non-root internal node has a single child"));
        }
        for edge in &nodes[id - 1].edges {
            if seen[edge.child - 1] {
                return Err(malformed("a node has two parents"));
            }
            seen[edge.child - 1] = true;
            visited += 1;
            stack.push(edge.child);
        }
    }
    if visited != node_count {
        return Err(malformed("unreachable trie nodes"));
    }
    let mut index_check: Vec<usize> = nodes.iter().flat_map(|n| n.indexes.iter().copied()).collect();
    index_check.sort_unstable();
    index_check.dedup();
    if index_check.len() != d {
        return Err(malformed("duplicate leaf string indexes"));
    }
    for node in &nodes {
        if !node.indexes.windows(2).all(|w| w[0] < w[1]) {
            return Err(malformed("leaf indexes are not ascending"));
        }
    }
    Ok(CompactTrie::assemble(nodes, concat_rlbwt, extract, d))
}
