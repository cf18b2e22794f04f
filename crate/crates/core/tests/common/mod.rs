#![allow(dead_code)]

use p300_core::lm::{normalize_text, Discounts, LayeredLm};
use p300_core::sim::SubjectModel;
use p300_core::synthetic::{gaussian_subject, MarkovText};

pub const SEED_TEXT: &str = include_str!("../fixtures/seed_text.txt");
/// Prose written apart from the seed text, so many of its words are unseen.
pub const HELD_OUT_TEXT: &str = include_str!("../fixtures/passage.txt");

pub fn markov() -> MarkovText {
    MarkovText::new(SEED_TEXT).unwrap()
}

/// Normalized training text of at least `min_chars` characters.
pub fn corpus(min_chars: usize) -> String {
    markov().generate(min_chars, 1)
}

pub fn lm(min_chars: usize) -> LayeredLm {
    LayeredLm::build(&corpus(min_chars), Discounts::default()).unwrap()
}

/// A passage of exactly `len` characters drawn from the same chain, not
/// ending in a space.
pub fn passage(len: usize, seed: u64) -> String {
    let text = markov().generate(len + 64, seed);
    text[..len].trim_end().to_string()
}

/// The first `len` characters of the held-out prose, normalized.
pub fn held_out_passage(len: usize) -> String {
    let text = normalize_text(HELD_OUT_TEXT);
    p300_core::synthetic::truncate_words(&text, len).to_string()
}

pub fn subject(id: &str, d_prime: f64, seed: u64) -> SubjectModel {
    SubjectModel::from_scored(&gaussian_subject(id, d_prime, 40, 10, seed)).unwrap()
}
