//! Layered character language model.
//!
//! Five prefix-count tables (unigram, bigram, trigram, word, biword) are
//! blended with absolute-discount backoff. Each level computes
//!
//! ```text
//! p_level(c | ctx) = max(count(ctx.c) - d, 0) / count(ctx) + d * L * p_lower(c)
//! L = distinct followers of ctx / count(ctx)
//! ```
//!
//! and a level whose context is empty or unseen passes the lower level's
//! probability through unchanged. The chain bottoms out at the unigram
//! relative frequency.

mod alphabet;
mod io;
mod table;

pub use alphabet::{is_normalized, normalize_text, CharDist, Symbol, ALPHABET_SIZE};
pub use table::{CountTable, Level};

use crate::error::{Error, Result};

/// Absolute discounts for the four backoff levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discounts {
    /// d1, biword level.
    pub biword: f64,
    /// d2, word level.
    pub word: f64,
    /// d3, trigram level.
    pub trigram: f64,
    /// d4, bigram level.
    pub bigram: f64,
}

impl Default for Discounts {
    fn default() -> Self {
        Discounts::uniform(0.5)
    }
}

impl Discounts {
    pub fn uniform(d: f64) -> Self {
        Discounts {
            biword: d,
            word: d,
            trigram: d,
            bigram: d,
        }
    }

    /// Build from `[d1, d2, d3, d4]`, rejecting values outside `[0, 1]`.
    pub fn new(d: [f64; 4]) -> Result<Self> {
        for (index, &value) in d.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidDiscount {
                    index: index + 1,
                    value,
                });
            }
        }
        Ok(Discounts {
            biword: d[0],
            word: d[1],
            trigram: d[2],
            bigram: d[3],
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.biword, self.word, self.trigram, self.bigram]
    }

    fn for_level(&self, level: Level) -> f64 {
        match level {
            Level::Biword => self.biword,
            Level::Word => self.word,
            Level::Trigram => self.trigram,
            Level::Bigram => self.bigram,
            Level::Unigram => 0.0,
        }
    }
}

/// Context strings each level conditions on, sliced out of a history.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contexts<'a> {
    /// Previous complete word, SPACE, current partial word.
    pub biword: Option<&'a str>,
    /// Current partial word.
    pub word: Option<&'a str>,
    /// Last two characters (or the one available).
    pub trigram: Option<&'a str>,
    /// Last character.
    pub bigram: Option<&'a str>,
}

impl<'a> Contexts<'a> {
    pub fn of(history: &'a str) -> Self {
        let bytes = history.as_bytes();
        let len = bytes.len();
        let partial_start = bytes.iter().rposition(|&b| b == b' ').map_or(0, |i| i + 1);
        let partial = &history[partial_start..];

        let biword = if partial_start >= 2 {
            let prev_end = partial_start - 1;
            let prev_start = bytes[..prev_end]
                .iter()
                .rposition(|&b| b == b' ')
                .map_or(0, |i| i + 1);
            (prev_start < prev_end).then(|| &history[prev_start..])
        } else {
            None
        };
        let non_empty = |s: &'a str| (!s.is_empty()).then_some(s);

        Contexts {
            biword,
            word: non_empty(partial),
            trigram: non_empty(&history[len.saturating_sub(2)..]),
            bigram: non_empty(&history[len.saturating_sub(1)..]),
        }
    }

    fn for_level(&self, level: Level) -> Option<&'a str> {
        match level {
            Level::Biword => self.biword,
            Level::Word => self.word,
            Level::Trigram => self.trigram,
            Level::Bigram => self.bigram,
            Level::Unigram => None,
        }
    }
}

/// Backoff levels from the bottom up, excluding the unigram floor.
const BACKOFF_ORDER: [Level; 4] = [Level::Bigram, Level::Trigram, Level::Word, Level::Biword];

/// The five count tables plus discounts. Immutable once built.
#[derive(Clone, Debug)]
pub struct LayeredLm {
    unigram: CountTable,
    bigram: CountTable,
    trigram: CountTable,
    word: CountTable,
    biword: CountTable,
    discounts: Discounts,
}

impl LayeredLm {
    /// Count every model from an already-normalized corpus.
    pub fn build(corpus: &str, discounts: Discounts) -> Result<Self> {
        Discounts::new(discounts.as_array())?;
        if let Some(bad) = corpus.chars().find(|&c| Symbol::from_char(c).is_none()) {
            return Err(Error::UnnormalizedCorpus(bad));
        }
        let words: Vec<&str> = corpus.split(' ').filter(|w| !w.is_empty()).collect();
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let bytes = corpus.as_bytes();
        let mut lm = LayeredLm::empty(discounts);
        for n in 1..=3 {
            let table = lm.table_mut(match n {
                1 => Level::Unigram,
                2 => Level::Bigram,
                _ => Level::Trigram,
            });
            for window in bytes.windows(n) {
                table.add(window, 1);
            }
        }

        let mut key = Vec::with_capacity(32);
        for w in &words {
            key.clear();
            key.extend_from_slice(w.as_bytes());
            key.push(b' ');
            lm.word.add(&key, 1);
        }
        for pair in words.windows(2) {
            key.clear();
            key.extend_from_slice(pair[0].as_bytes());
            key.push(b' ');
            key.extend_from_slice(pair[1].as_bytes());
            key.push(b' ');
            lm.biword.add(&key, 1);
        }
        let missing: String = Symbol::all()
            .filter(|s| lm.p_unigram(s.index()) == 0.0)
            .map(Symbol::to_char)
            .collect();
        if !missing.is_empty() {
            log::warn!("corpus never uses {missing:?}; those symbols get zero probability");
        }
        Ok(lm)
    }

    /// Normalize raw text, then build.
    pub fn from_raw_text(raw: &str, discounts: Discounts) -> Result<Self> {
        LayeredLm::build(&normalize_text(raw), discounts)
    }

    fn empty(discounts: Discounts) -> Self {
        LayeredLm {
            unigram: CountTable::new(Level::Unigram),
            bigram: CountTable::new(Level::Bigram),
            trigram: CountTable::new(Level::Trigram),
            word: CountTable::new(Level::Word),
            biword: CountTable::new(Level::Biword),
            discounts,
        }
    }

    pub fn discounts(&self) -> Discounts {
        self.discounts
    }

    pub fn table(&self, level: Level) -> &CountTable {
        match level {
            Level::Unigram => &self.unigram,
            Level::Bigram => &self.bigram,
            Level::Trigram => &self.trigram,
            Level::Word => &self.word,
            Level::Biword => &self.biword,
        }
    }

    fn table_mut(&mut self, level: Level) -> &mut CountTable {
        match level {
            Level::Unigram => &mut self.unigram,
            Level::Bigram => &mut self.bigram,
            Level::Trigram => &mut self.trigram,
            Level::Word => &mut self.word,
            Level::Biword => &mut self.biword,
        }
    }

    fn p_unigram(&self, sym: usize) -> f64 {
        let total = self.unigram.total();
        if total == 0 {
            return 0.0;
        }
        let c = Symbol::from_index(sym).unwrap().to_char();
        self.unigram.count(c.encode_utf8(&mut [0; 4])) as f64 / total as f64
    }

    /// Probability of `c` after `history`, evaluated with the cascade truncated
    /// at `top`. `Level::Biword` is the full model; `Level::Unigram` is the floor.
    pub fn p_level(&self, history: &str, c: Symbol, top: Level) -> f64 {
        let ctx = Contexts::of(history);
        let sym = c.index();
        let mut p = self.p_unigram(sym);
        for level in BACKOFF_ORDER {
            if level_rank(level) > level_rank(top) {
                break;
            }
            let Some(view) = self.level_context(&ctx, level) else {
                continue;
            };
            let d = self.discounts.for_level(level);
            let n = view.count as f64;
            let l = view.distinct_followers() as f64 / n;
            let seen = (view.follower_count(sym) as f64 - d).max(0.0) / n;
            p = seen + d * l * p;
        }
        p
    }

    /// Smoothed probability that `c` follows `history`.
    pub fn p_char(&self, history: &str, c: Symbol) -> f64 {
        self.p_level(history, c, Level::Biword)
    }

    /// Full next-symbol distribution; entry `i` equals `p_char` for symbol `i`.
    pub fn p_next(&self, history: &str) -> CharDist {
        let ctx = Contexts::of(history);
        let mut dist = [0.0; ALPHABET_SIZE];
        for (sym, p) in dist.iter_mut().enumerate() {
            *p = self.p_unigram(sym);
        }
        for level in BACKOFF_ORDER {
            let Some(view) = self.level_context(&ctx, level) else {
                continue;
            };
            let d = self.discounts.for_level(level);
            let n = view.count as f64;
            let l = view.distinct_followers() as f64 / n;
            let mut seen = [0.0; ALPHABET_SIZE];
            for (sym, count) in view.followers() {
                seen[sym] = (count as f64 - d).max(0.0) / n;
            }
            for (p, s) in dist.iter_mut().zip(seen) {
                *p = s + d * l * *p;
            }
        }
        let sum: f64 = dist.iter().sum();
        if sum > 0.0 && (sum - 1.0).abs() > 1e-9 {
            log::warn!("renormalizing next-symbol distribution with mass {sum}");
            dist.iter_mut().for_each(|p| *p /= sum);
        }
        dist
    }

    /// Context node for `level`, or `None` when the level passes through.
    fn level_context<'a>(
        &'a self,
        ctx: &Contexts<'_>,
        level: Level,
    ) -> Option<table::ContextView<'a>> {
        let key = ctx.for_level(level)?;
        let view = self.table(level).context(key.as_bytes())?;
        (view.count > 0 && view.distinct_followers() > 0).then_some(view)
    }

    /// Chain-rule probability of finishing the current word as `candidate`
    /// followed by SPACE.
    ///
    /// Returns 1 when `history` already ends with `candidate` and a SPACE, and
    /// 0 when `candidate` does not extend the current partial word.
    pub fn p_word_completion(&self, history: &str, candidate: &str) -> f64 {
        if let Some(done) = history.strip_suffix(' ') {
            let last = done.rsplit(' ').next().unwrap_or("");
            if !candidate.is_empty() && last == candidate {
                return 1.0;
            }
        }
        let partial = history.rsplit(' ').next().unwrap_or("");
        let Some(rest) = candidate.strip_prefix(partial) else {
            return 0.0;
        };
        let mut h = String::with_capacity(history.len() + rest.len() + 1);
        h.push_str(history);
        let mut prob = 1.0;
        for ch in rest.chars().chain(std::iter::once(' ')) {
            let Some(sym) = Symbol::from_char(ch) else {
                return 0.0;
            };
            prob *= self.p_char(&h, sym);
            h.push(ch);
        }
        prob
    }
}

fn level_rank(level: Level) -> u8 {
    match level {
        Level::Unigram => 0,
        Level::Bigram => 1,
        Level::Trigram => 2,
        Level::Word => 3,
        Level::Biword => 4,
    }
}
