mod common;

use std::sync::OnceLock;

use p300_core::lm::{is_normalized, normalize_text, Discounts, LayeredLm, Level, Symbol};
use proptest::prelude::*;

fn model() -> &'static LayeredLm {
    static LM: OnceLock<LayeredLm> = OnceLock::new();
    LM.get_or_init(|| common::lm(30_000))
}

fn history() -> impl Strategy<Value = String> {
    "[a-z ]{0,30}"
}

proptest! {
    #[test]
    fn next_symbol_distribution_sums_to_one(h in history()) {
        let lm = model();
        let sum: f64 = Symbol::all().map(|c| lm.p_char(&h, c)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum} after {h:?}");
    }

    #[test]
    fn p_next_agrees_with_p_char(h in history()) {
        let lm = model();
        let dist = lm.p_next(&h);
        for c in Symbol::all() {
            prop_assert!((dist[c.index()] - lm.p_char(&h, c)).abs() < 1e-15);
        }
    }

    #[test]
    fn unseen_word_passes_through(word in "[qxzj]{3,6}", c in 0usize..27) {
        let lm = model();
        let c = Symbol::from_index(c).unwrap();
        let h = format!("the {word}");
        prop_assert_eq!(lm.p_level(&h, c, Level::Word), lm.p_level(&h, c, Level::Trigram));
        let h = format!("{word} the");
        prop_assert_eq!(lm.p_level(&h, c, Level::Biword), lm.p_level(&h, c, Level::Word));
    }

    #[test]
    fn normalization_is_idempotent(raw in "\\PC{0,60}") {
        let once = normalize_text(&raw);
        prop_assert!(is_normalized(&once));
        prop_assert_eq!(normalize_text(&once), once);
    }
}

#[test]
fn every_corpus_symbol_has_mass() {
    let lm = model();
    for c in Symbol::all() {
        assert!(lm.p_char("zzzz qqqq", c) > 0.0, "{c:?}");
    }
}

#[test]
fn hand_evaluated_cascade() {
    // "aab": unigram a=2/3, b=1/3; every other context is empty after "".
    let lm = LayeredLm::build("aab", Discounts::default()).unwrap();
    let a = Symbol::from_char('a').unwrap();
    assert!((lm.p_char("", a) - 2.0 / 3.0).abs() < 1e-15);

    // After "a": bigram context "a" has followers a:1, b:1, N=2, K=2, d=0.5.
    // p(b) = (1-0.5)/2 + 0.5*(2/2)*p_uni(b) = 0.25 + 0.5/3.
    let b = Symbol::from_char('b').unwrap();
    let bigram = 0.25 + 0.5 / 3.0;
    assert!((lm.p_level("a", b, Level::Bigram) - bigram).abs() < 1e-15);
    // A one-char history is its own trigram suffix: "a" is followed only by
    // 'a' (in "aab"), N=1, K=1, so b gets only the backoff share. The word
    // "aab " gives the partial word "a" the same single follower.
    let trigram = 0.5 * bigram;
    assert!((lm.p_level("a", b, Level::Trigram) - trigram).abs() < 1e-15);
    let word = 0.5 * trigram;
    assert!((lm.p_level("a", b, Level::Word) - word).abs() < 1e-15);
}

#[test]
fn dump_round_trip_preserves_probabilities() {
    let lm = common::lm(5_000);
    let mut buf = Vec::new();
    lm.write_dump(&mut buf).unwrap();
    let back = LayeredLm::read_dump(buf.as_slice()).unwrap();
    for h in ["", "the ", "the far", "qq the w", "morning tr"] {
        for c in Symbol::all() {
            assert_eq!(lm.p_char(h, c), back.p_char(h, c), "{h:?} {c:?}");
        }
    }
    assert_eq!(back.discounts(), lm.discounts());
}

#[test]
fn bad_corpora_are_rejected() {
    assert!(LayeredLm::build("", Discounts::default()).is_err());
    assert!(LayeredLm::build("   ", Discounts::default()).is_err());
    assert!(LayeredLm::build("Hello", Discounts::default()).is_err());
    assert!(Discounts::new([0.5, 1.5, 0.5, 0.5]).is_err());
}
