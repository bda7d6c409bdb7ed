//! Dictionary prefix search over a compact trie with streamed edge labels.
//!
//! The dictionary strings are concatenated — each followed by a terminator
//! byte, the whole followed by the sentinel — and indexed for bookmarked
//! extraction with one mark per trie edge. The trie itself stores no label
//! bytes: an edge records its first byte (for child dispatch), its mark,
//! and its length, and traversal streams the label out of the compressed
//! text one character at a time. Matching a pattern therefore extracts at
//! most `|P|` characters regardless of dictionary size.

use crate::bwt::{build_suffix_array, bwt_from_sa, Rlbwt, Text, SENTINEL};
use crate::extract::ExtractIndex;
use crate::tables::MoveTables;

/// Reserved byte appended to every dictionary string before concatenation;
/// it makes any string set prefix-free. Dictionary strings may not contain
/// it (nor the sentinel).
pub const TERMINATOR: u8 = 1;

/// Errors from dictionary ingestion.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DictionaryError {
    /// The dictionary holds no strings at all.
    #[error("the dictionary is empty")]
    Empty,
    /// Empty strings are not indexable.
    #[error("string {index} is empty")]
    EmptyString { index: usize },
    /// A string contains one of the two reserved bytes.
    #[error("string {index} contains reserved byte {byte:#04x} at offset {offset}")]
    ReservedByte { index: usize, offset: usize, byte: u8 },
}

/// A validated, non-empty set of non-empty strings over bytes ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    strings: Vec<Vec<u8>>,
}

impl Dictionary {
    pub fn new(strings: Vec<Vec<u8>>) -> Result<Dictionary, DictionaryError> {
        if strings.is_empty() {
            return Err(DictionaryError::Empty);
        }
        for (at, s) in strings.iter().enumerate() {
            if s.is_empty() {
                return Err(DictionaryError::EmptyString { index: at + 1 });
            }
            if let Some(bad) = s.iter().position(|&b| b == SENTINEL || b == TERMINATOR) {
                return Err(DictionaryError::ReservedByte {
                    index: at + 1,
                    offset: bad + 1,
                    byte: s[bad],
                });
            }
        }
        Ok(Dictionary { strings })
    }

    /// Number of strings `d`.
    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strings(&self) -> &[Vec<u8>] {
        &self.strings
    }

    /// Sum of string lengths, terminators and sentinel excluded.
    pub fn total_len(&self) -> usize {
        self.strings.iter().map(|s| s.len()).sum()
    }
}

/// One outgoing edge: dispatch byte, 1-based mark of the label start in
/// the concatenated text, label length, and child node id (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Edge {
    pub(crate) head: u8,
    pub(crate) mark: usize,
    pub(crate) len: usize,
    pub(crate) child: usize,
}

/// A trie node: outgoing edges sorted by head byte, the range of leaves
/// below it, and — on leaf nodes only — the dictionary indexes ending
/// here. Equal strings share one leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Node {
    pub(crate) edges: Vec<Edge>,
    pub(crate) leaf_count: usize,
    /// 1-based ids into the leaf list; every node has at least one leaf
    /// below it.
    pub(crate) first_leaf: usize,
    pub(crate) last_leaf: usize,
    /// 1-based dictionary indexes, ascending; non-empty exactly on nodes
    /// without edges.
    pub(crate) indexes: Vec<usize>,
}

/// Compact trie over a dictionary, answering prefix-locate and
/// prefix-count. Unary paths are collapsed, so every internal node other
/// than the root has at least two children.
#[derive(Debug, Clone)]
pub struct CompactTrie {
    /// Node 1 is the root. Children precede nothing in particular; leaf
    /// ids, however, run in lexicographic order.
    nodes: Vec<Node>,
    /// Leaf id (1-based) → node id carrying that leaf.
    leaf_nodes: Vec<usize>,
    /// Run-length BWT of the concatenated text.
    concat_rlbwt: Rlbwt,
    /// Bookmarked extraction over the concatenated text with one mark per
    /// edge-label start.
    extract: ExtractIndex,
    num_strings: usize,
}

struct Item {
    /// The terminated string.
    bytes: Vec<u8>,
    /// Ascending original dictionary indexes sharing this string.
    indexes: Vec<usize>,
    /// 1-based offset of this string in the concatenated text.
    offset: usize,
}

impl CompactTrie {
    pub fn build(dict: &Dictionary) -> CompactTrie {
        // Concatenate: s_1 term s_2 term … s_d term sentinel.
        let mut concat = Vec::with_capacity(dict.total_len() + dict.len());
        let mut offsets = Vec::with_capacity(dict.len());
        for s in dict.strings() {
            offsets.push(concat.len() + 1);
            concat.extend_from_slice(s);
            concat.push(TERMINATOR);
        }
        let text = Text::from_bytes(&concat)
            .expect("dictionary validation excluded the sentinel byte");

        // Unique terminated strings in lexicographic order, each carrying
        // its original indexes and the offset of its first original copy.
        let mut order: Vec<usize> = (0..dict.len()).collect();
        order.sort_by(|&a, &b| dict.strings()[a].cmp(&dict.strings()[b]));
        let mut items: Vec<Item> = Vec::new();
        for i in order {
            let mut terminated = dict.strings()[i].clone();
            terminated.push(TERMINATOR);
            match items.last_mut() {
                Some(last) if last.bytes == terminated => last.indexes.push(i + 1),
                _ => items.push(Item {
                    bytes: terminated,
                    indexes: vec![i + 1],
                    offset: offsets[i],
                }),
            }
        }
        // Keep each item's offset at its smallest original index for
        // deterministic marks.
        for item in &mut items {
            let smallest = item.indexes[0];
            item.offset = offsets[smallest - 1];
        }

        let mut builder = Builder {
            items: &items,
            nodes: Vec::new(),
        };
        let root = builder.node(0, items.len(), 0);
        debug_assert_eq!(root, 1);
        let mut nodes = builder.nodes;

        // Collect the distinct label-start offsets, in order, as the marks;
        // edges then refer to marks by index.
        let mut marks: Vec<usize> = nodes
            .iter()
            .flat_map(|node| node.edges.iter().map(|e| e.mark))
            .collect();
        marks.sort_unstable();
        marks.dedup();
        for node in &mut nodes {
            for edge in &mut node.edges {
                edge.mark = marks.binary_search(&edge.mark).expect("own offset") + 1;
            }
        }

        let rlbwt = Rlbwt::encode(&bwt_from_sa(&text, &build_suffix_array(&text)));
        let tables = MoveTables::build(&rlbwt).expect("a real text always builds");
        let extract = ExtractIndex::build(&rlbwt, &tables, marks)
            .expect("label starts are in-range ascending positions");
        CompactTrie::assemble(nodes, rlbwt, extract, dict.len())
    }

    /// Number of dictionary strings `d`.
    pub fn num_strings(&self) -> usize {
        self.num_strings
    }

    /// Runs in the concatenated text's BWT.
    pub fn num_runs(&self) -> usize {
        self.concat_rlbwt.num_runs()
    }

    pub fn concat_rlbwt(&self) -> &Rlbwt {
        &self.concat_rlbwt
    }

    pub(crate) fn extract_index(&self) -> &ExtractIndex {
        &self.extract
    }

    pub(crate) fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// The deepest node whose root path spells a string `pattern` is a
    /// prefix of, or `None` when the pattern matches nothing. Patterns
    /// containing reserved bytes match nothing by definition.
    fn locate_node(&self, pattern: &[u8]) -> Option<usize> {
        if pattern.iter().any(|&b| b == SENTINEL || b == TERMINATOR) {
            return None;
        }
        let mut node = 1usize;
        let mut used = 0usize;
        while used < pattern.len() {
            let edges = &self.nodes[node - 1].edges;
            let slot = edges
                .binary_search_by_key(&pattern[used], |e| e.head)
                .ok()?;
            let edge = edges[slot];
            let take = (pattern.len() - used).min(edge.len);
            let label = self
                .extract
                .extract(edge.mark, take)
                .expect("edge labels lie inside the concatenated text");
            if label != pattern[used..used + take] {
                return None;
            }
            used += take;
            node = edge.child;
        }
        Some(node)
    }

    /// 1-based indexes of the dictionary strings having `pattern` as a
    /// prefix, ascending. The empty pattern matches every string.
    pub fn prefix_locate(&self, pattern: &[u8]) -> Vec<usize> {
        let Some(node) = self.locate_node(pattern) else {
            return Vec::new();
        };
        let node = &self.nodes[node - 1];
        let mut out: Vec<usize> = (node.first_leaf..=node.last_leaf)
            .flat_map(|leaf| self.nodes[self.leaf_nodes[leaf - 1] - 1].indexes.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// `prefix_locate(pattern).len()`, without enumerating: read off the
    /// matched node's leaf count.
    pub fn prefix_count(&self, pattern: &[u8]) -> usize {
        match self.locate_node(pattern) {
            Some(node) => self.nodes[node - 1].leaf_count,
            None => 0,
        }
    }

    /// Assemble from nodes whose edges and leaf indexes are set; the leaf
    /// ids, leaf counts, and per-node leaf ranges are (re)computed here,
    /// so build and load share one derivation. Structural validity (a
    /// tree rooted at node 1, edges sorted, leaves exactly the edgeless
    /// nodes) is the caller's contract.
    pub(crate) fn assemble(
        mut nodes: Vec<Node>,
        concat_rlbwt: Rlbwt,
        extract: ExtractIndex,
        num_strings: usize,
    ) -> CompactTrie {
        let leaf_nodes = finalize(&mut nodes);
        CompactTrie {
            nodes,
            leaf_nodes,
            concat_rlbwt,
            extract,
            num_strings,
        }
    }
}

/// Fill in leaf ids (lexicographic = depth-first over sorted edges), leaf
/// counts, and leaf ranges. Iterative, so hostile deep inputs at load time
/// cannot overflow the stack. Returns leaf id → node id.
fn finalize(nodes: &mut [Node]) -> Vec<usize> {
    let mut preorder = Vec::with_capacity(nodes.len());
    let mut stack = vec![1usize];
    let mut leaf_nodes = Vec::new();
    let mut leaf_id = vec![0usize; nodes.len()];
    while let Some(id) = stack.pop() {
        preorder.push(id);
        let node = &nodes[id - 1];
        if node.edges.is_empty() {
            leaf_nodes.push(id);
            leaf_id[id - 1] = leaf_nodes.len();
        } else {
            for edge in node.edges.iter().rev() {
                stack.push(edge.child);
            }
        }
    }
    // Children come after their parent in preorder, so the reverse pass
    // sees every child finished before its parent.
    for &id in preorder.iter().rev() {
        if nodes[id - 1].edges.is_empty() {
            let lid = leaf_id[id - 1];
            nodes[id - 1].leaf_count = nodes[id - 1].indexes.len();
            nodes[id - 1].first_leaf = lid;
            nodes[id - 1].last_leaf = lid;
        } else {
            let children: Vec<usize> = nodes[id - 1].edges.iter().map(|e| e.child).collect();
            let count = children.iter().map(|&c| nodes[c - 1].leaf_count).sum();
            let first = nodes[children[0] - 1].first_leaf;
            let last = nodes[*children.last().expect("non-empty") - 1].last_leaf;
            let node = &mut nodes[id - 1];
            node.leaf_count = count;
            node.first_leaf = first;
            node.last_leaf = last;
        }
    }
    leaf_nodes
}

struct Builder<'a> {
    items: &'a [Item],
    nodes: Vec<Node>,
}

impl Builder<'_> {
    /// Build the subtree for the sorted unique strings `items[lo..hi]`,
    /// which all agree on their first `depth` bytes; returns the node id.
    /// Only edges and leaf indexes are filled in — [`finalize`] derives
    /// the rest. During construction, `Edge::mark` temporarily holds the
    /// raw concatenated-text offset of the label start.
    fn node(&mut self, lo: usize, hi: usize, depth: usize) -> usize {
        let id = self.reserve();
        let mut edges = Vec::new();
        let mut glo = lo;
        while glo < hi {
            let head = self.items[glo].bytes[depth];
            let mut ghi = glo + 1;
            while ghi < hi && self.items[ghi].bytes[depth] == head {
                ghi += 1;
            }
            let (child, len) = if ghi - glo == 1 {
                let item = &self.items[glo];
                (self.leaf(glo), item.bytes.len() - depth)
            } else {
                // The group's longest common prefix: first vs. last string,
                // since the slice is sorted.
                let a = &self.items[glo].bytes;
                let b = &self.items[ghi - 1].bytes;
                let mut lcp = depth;
                while lcp < a.len().min(b.len()) && a[lcp] == b[lcp] {
                    lcp += 1;
                }
                (self.node(glo, ghi, lcp), lcp - depth)
            };
            edges.push(Edge {
                head,
                mark: self.items[glo].offset + depth,
                len,
                child,
            });
            glo = ghi;
        }
        self.nodes[id - 1].edges = edges;
        id
    }

    fn leaf(&mut self, item: usize) -> usize {
        let id = self.reserve();
        self.nodes[id - 1].indexes = self.items[item].indexes.clone();
        id
    }

    fn reserve(&mut self) -> usize {
        self.nodes.push(Node {
            edges: Vec::new(),
            leaf_count: 0,
            first_leaf: 0,
            last_leaf: 0,
            indexes: Vec::new(),
        });
        self.nodes.len()
    }
}
