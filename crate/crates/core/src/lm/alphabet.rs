//! The 27-symbol character universe: `a`..`z` plus the word separator.

use std::fmt;

/// Number of symbols the language model predicts over.
pub const ALPHABET_SIZE: usize = 27;

/// One of the 26 lowercase letters or SPACE.
///
/// Symbols are ordered alphabetically with SPACE last; that order is also the
/// tie-break order used by the flashboard layouts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u8);

impl Symbol {
    pub const SPACE: Symbol = Symbol(26);

    pub fn from_index(index: usize) -> Option<Symbol> {
        (index < ALPHABET_SIZE).then_some(Symbol(index as u8))
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            'a'..='z' => Some(Symbol(c as u8 - b'a')),
            ' ' => Some(Symbol::SPACE),
            _ => None,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Symbol> {
        match b {
            b'a'..=b'z' => Some(Symbol(b - b'a')),
            b' ' => Some(Symbol::SPACE),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn to_char(self) -> char {
        if self == Symbol::SPACE {
            ' '
        } else {
            (b'a' + self.0) as char
        }
    }

    pub fn is_space(self) -> bool {
        self == Symbol::SPACE
    }

    /// All symbols in alphabet order.
    pub fn all() -> impl Iterator<Item = Symbol> + Clone {
        (0..ALPHABET_SIZE as u8).map(Symbol)
    }

    /// Letters only, without SPACE.
    pub fn letters() -> impl Iterator<Item = Symbol> + Clone {
        (0..26u8).map(Symbol)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_space() {
            f.write_str("SP")
        } else {
            write!(f, "{}", self.to_char())
        }
    }
}

/// A probability distribution over the alphabet, indexed by [`Symbol::index`].
pub type CharDist = [f64; ALPHABET_SIZE];

/// Case-fold and strip raw text down to alphabet symbols.
///
/// Letters are lowercased; whitespace, hyphens, dashes and slashes separate
/// words; digits, other punctuation and non-ASCII characters are dropped.
/// Separator runs collapse to one SPACE and the result is trimmed.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_ascii_alphabetic() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c.to_ascii_lowercase());
        } else if c.is_whitespace() || matches!(c, '-' | '/' | '\u{2013}' | '\u{2014}') {
            pending_space = true;
        }
    }
    out
}

/// True when `text` only holds alphabet symbols.
pub fn is_normalized(text: &str) -> bool {
    text.bytes().all(|b| Symbol::from_byte(b).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_roundtrip() {
        for s in Symbol::all() {
            assert_eq!(Symbol::from_char(s.to_char()), Some(s));
        }
        assert_eq!(Symbol::all().count(), ALPHABET_SIZE);
        assert_eq!(Symbol::from_char('A'), None);
        assert!(Symbol::SPACE > Symbol::from_char('z').unwrap());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("The Cat!"), "the cat");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("A  b\t3c"), "a b c");
        assert_eq!(normalize_text("  self-evident, \n truths 1776 "), "self evident truths");
        assert_eq!(normalize_text("don't"), "dont");
        assert_eq!(normalize_text("42 !!"), "");
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = normalize_text("When in the Course of human events...\nit becomes");
        assert_eq!(normalize_text(&once), once);
        assert!(is_normalized(&once));
    }
}
