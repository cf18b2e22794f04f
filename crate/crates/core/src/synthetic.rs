//! Synthetic inputs: Markov-chain text and Gaussian subjects.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::flashboard::GROUP_COUNT;
use crate::lm::normalize_text;
use crate::swlda::{ScoredEpoch, ScoredSubject, CHANNELS, SAMPLES_PER_EPOCH};

/// Word-bigram chain over a normalized seed text.
#[derive(Clone, Debug)]
pub struct MarkovText {
    words: Vec<String>,
    /// Successor word ids, with repetition, for each word id.
    next: Vec<Vec<u32>>,
}

impl MarkovText {
    pub fn new(seed_text: &str) -> Result<Self> {
        let norm = normalize_text(seed_text);
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let mut words = Vec::new();
        let mut seq = Vec::new();
        for w in norm.split(' ').filter(|w| !w.is_empty()) {
            let id = *ids.entry(w).or_insert_with(|| {
                words.push(w.to_string());
                (words.len() - 1) as u32
            });
            seq.push(id);
        }
        if seq.len() < 2 {
            return Err(Error::EmptyCorpus);
        }
        let mut next = vec![Vec::new(); words.len()];
        for pair in seq.windows(2) {
            next[pair[0] as usize].push(pair[1]);
        }
        // Close the chain so every word has a successor.
        let (last, first) = (seq[seq.len() - 1], seq[0]);
        next[last as usize].push(first);
        Ok(MarkovText { words, next })
    }

    /// Normalized text of at least `min_chars` characters, whole words only.
    pub fn generate(&self, min_chars: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cur = rng.random_range(0..self.words.len());
        let mut out = String::with_capacity(min_chars + 16);
        while out.len() < min_chars {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&self.words[cur]);
            let succ = &self.next[cur];
            cur = succ[rng.random_range(0..succ.len())] as usize;
        }
        out
    }
}

/// Cut a text to at most `len` characters, ending on a word boundary.
pub fn truncate_words(text: &str, len: usize) -> &str {
    if text.len() <= len {
        return text;
    }
    match text[..=len].rfind(' ') {
        Some(i) if i > 0 => &text[..i],
        _ => &text[..len],
    }
}

/// Pre-scored subject whose attended scores are `N(d_prime, 1)` and
/// non-attended scores `N(0, 1)`. Each character gets `scans` rounds of 12
/// flashes in a random order, two of which are attended.
pub fn gaussian_subject(id: &str, d_prime: f64, chars: u32, scans: u32, seed: u64) -> ScoredSubject {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attended = Normal::new(d_prime, 1.0).expect("unit variance");
    let mut epochs = Vec::with_capacity((chars * scans) as usize * GROUP_COUNT);
    for c in 0..chars {
        let row = rng.random_range(0..6u8);
        let col = 6 + rng.random_range(0..6u8);
        let mut flash = 0;
        for _ in 0..scans {
            let mut order: Vec<u8> = (0..GROUP_COUNT as u8).collect();
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
            for g in order {
                let is_target = g == row || g == col;
                let score = if is_target {
                    attended.sample(&mut rng)
                } else {
                    StandardNormal.sample(&mut rng)
                };
                epochs.push(ScoredEpoch {
                    attended: is_target,
                    char_index: c,
                    flash_index: flash,
                    group_id: g,
                    score,
                });
                flash += 1;
            }
        }
    }
    ScoredSubject {
        id: id.to_string(),
        epochs,
    }
}

/// Raw epochs with white noise plus, on attended flashes, a positive
/// deflection of height `amplitude` on the central and parietal channels
/// between 250 and 450 ms.
pub fn raw_epochs(
    chars: u32,
    flashes_per_char: u32,
    amplitude: f64,
    seed: u64,
) -> impl Iterator<Item = (bool, u32, u32, u8, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let erp_channels = [19usize, 20, 21, 22];
    let window = (64usize, 115usize);
    (0..chars).flat_map(move |c| {
        let row = rng.random_range(0..6u8);
        let col = 6 + rng.random_range(0..6u8);
        let mut out = Vec::with_capacity(flashes_per_char as usize);
        for f in 0..flashes_per_char {
            let g = (f % GROUP_COUNT as u32) as u8;
            let att = g == row || g == col;
            let mut samples: Vec<f64> = (0..CHANNELS * SAMPLES_PER_EPOCH)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            if att {
                for &ch in &erp_channels {
                    for t in window.0..window.1 {
                        samples[ch * SAMPLES_PER_EPOCH + t] += amplitude;
                    }
                }
            }
            out.push((att, c, f, g, samples));
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::is_normalized;

    #[test]
    fn markov_text_is_normalized_and_seeded() {
        let m = MarkovText::new("The cat sat. The dog ran! A cat ran far, far away.").unwrap();
        let a = m.generate(200, 1);
        assert!(a.len() >= 200);
        assert!(is_normalized(&a));
        assert_eq!(a, m.generate(200, 1));
        assert_ne!(a, m.generate(200, 2));
        assert!(MarkovText::new("one").is_err());
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_words("the cat sat", 7), "the cat");
        assert_eq!(truncate_words("the cat sat", 8), "the cat");
        assert_eq!(truncate_words("the cat", 50), "the cat");
    }

    #[test]
    fn gaussian_subject_layout() {
        let s = gaussian_subject("x", 2.0, 3, 10, 4);
        assert_eq!(s.epochs.len(), 3 * 10 * 12);
        for chunk in s.epochs.chunks(12) {
            assert_eq!(chunk.iter().filter(|e| e.attended).count(), 2);
        }
    }
}
