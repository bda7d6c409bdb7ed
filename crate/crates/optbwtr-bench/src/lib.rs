//! Corpus generators for benchmarking: highly repetitive texts whose run
//! count stays fixed while their length grows.

/// A deterministic pseudo-random block of `len` bytes over `sigma` letters
/// starting at `b'a'`, from a fixed xorshift stream.
pub fn random_block(len: usize, sigma: u8, seed: u64) -> Vec<u8> {
    let mut state = seed | 1;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            b'a' + (state % sigma as u64) as u8
        })
        .collect()
}

/// `copies` repetitions of a fixed block: length grows with `copies`, the
/// BWT run count barely moves.
pub fn repetitive_corpus(block_len: usize, copies: usize) -> Vec<u8> {
    let block = random_block(block_len, 4, 0x9e3779b97f4a7c15);
    let mut out = Vec::with_capacity(block_len * copies);
    for _ in 0..copies {
        out.extend_from_slice(&block);
    }
    out
}
