//! Planted-signal toy data for capacity and ablation checks.

use hatewatch_core::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::net::Example;

/// Ids 2..8 are the planted signal tokens: 2–3 hate, 4–5 abusive, 6–7
/// neither. Filler ids start at 8.
pub const SIGNAL: [[u32; 2]; 3] = [[2, 3], [4, 5], [6, 7]];
const FIRST_FILLER: u32 = 8;

/// `n` sequences of 6 to 16 random filler tokens, each with one class
/// token at a random position. Classes cycle hate, abusive, neither.
pub fn planted_dataset(n: usize, vocab_size: usize, seed: u64) -> Vec<Example> {
    assert!(vocab_size as u32 > FIRST_FILLER + 1, "vocabulary too small for planted data");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = Label::ALL[i % 3];
            let len = rng.gen_range(6..=16);
            let mut ids: Vec<u32> = (0..len).map(|_| rng.gen_range(FIRST_FILLER..vocab_size as u32)).collect();
            let at = rng.gen_range(0..len);
            ids[at] = SIGNAL[label.index()][rng.gen_range(0..2)];
            Example { ids, label }
        })
        .collect()
}

/// Pads or truncates to `cap`.
pub fn pad_to(ids: &[u32], cap: usize) -> Vec<u32> {
    let mut v: Vec<u32> = ids.iter().copied().take(cap).collect();
    v.resize(cap, crate::net::PAD);
    v
}
