//! Word completion over the character model, external suggestion layering
//! and the oracle bounds.

mod suggester;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub use suggester::{SuggesterHandle, SuggestionProvider, Transport};

use crate::lm::{CharDist, LayeredLm, Symbol, ALPHABET_SIZE};

/// Default cap on characters added to the partial word.
pub const DEFAULT_MAX_LEN: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    /// The whole word, partial prefix included, without SPACE.
    pub word: String,
    pub prob: f64,
}

impl Suggestion {
    pub fn new(word: impl Into<String>, prob: f64) -> Self {
        Suggestion {
            word: word.into(),
            prob,
        }
    }
}

/// The partial word at the end of `history` (empty after a SPACE).
pub fn partial_word(history: &str) -> &str {
    history.rsplit(' ').next().unwrap_or("")
}

/// `history` with the partial word removed.
pub fn word_context(history: &str) -> &str {
    &history[..history.len() - partial_word(history).len()]
}

/// One expanded node of the search record.
#[derive(Clone, Debug, PartialEq)]
pub struct TrellisNode {
    pub symbol: Symbol,
    pub logprob: f64,
    /// Index into the previous stage, `None` for stage 0.
    pub backpointer: Option<usize>,
}

/// Record of a completion search: the nodes expanded per stage and the
/// completed words with their log-probabilities.
///
/// A node is keyed by the full path that reaches it, so each node keeps
/// exactly one incoming path.
#[derive(Clone, Debug, Default)]
pub struct Trellis {
    pub stages: Vec<Vec<TrellisNode>>,
    pub completed: Vec<(String, f64)>,
}

impl Trellis {
    /// Letters spelled by the path ending at `stages[stage][index]`.
    pub fn path(&self, stage: usize, index: usize) -> String {
        let mut out = Vec::with_capacity(stage + 1);
        let mut cur = Some((stage, index));
        while let Some((s, i)) = cur {
            let node = &self.stages[s][i];
            out.push(node.symbol.to_char());
            cur = node.backpointer.map(|b| (s - 1, b));
        }
        out.iter().rev().collect()
    }
}

#[derive(Debug)]
struct Frontier {
    logprob: f64,
    /// (stage, index) of the last node, `None` for the empty path.
    at: Option<(usize, usize)>,
    letters: String,
    terminal: bool,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on log-probability; among equals, alphabetical first.
        self.logprob
            .total_cmp(&other.logprob)
            .then_with(|| other.letters.cmp(&self.letters))
            .then_with(|| other.terminal.cmp(&self.terminal))
    }
}

/// Best-first expansion of the completion trellis.
///
/// Every branch is scored with `p_char`, so path log-probabilities never
/// increase and the first `n` completed words popped are the `n` best. The
/// search keeps popping while the frontier still ties the `n`th score so that
/// ties resolve alphabetically.
pub fn dijkstra_trellis(lm: &LayeredLm, history: &str, n: usize, max_len: usize) -> Trellis {
    let mut trellis = Trellis::default();
    if n == 0 {
        return trellis;
    }
    let partial = partial_word(history);
    let mut heap = BinaryHeap::new();
    heap.push(Frontier {
        logprob: 0.0,
        at: None,
        letters: String::new(),
        terminal: false,
    });
    let mut scratch = String::with_capacity(history.len() + max_len + 1);

    while let Some(node) = heap.pop() {
        if trellis.completed.len() >= n {
            let nth = trellis.completed[n - 1].1;
            if node.logprob < nth {
                break;
            }
        }
        if node.terminal {
            trellis
                .completed
                .push((format!("{partial}{}", node.letters), node.logprob));
            continue;
        }

        scratch.clear();
        scratch.push_str(history);
        scratch.push_str(&node.letters);
        let dist = lm.p_next(&scratch);
        let depth = node.letters.len();
        let stage = node.at.map_or(0, |(s, _)| s + 1);
        if trellis.stages.len() <= stage {
            trellis.stages.push(Vec::new());
        }
        for sym in Symbol::all() {
            let p = dist[sym.index()];
            if p <= 0.0 {
                continue;
            }
            let terminal = sym.is_space();
            if terminal && depth == 0 && partial.is_empty() {
                continue;
            }
            if !terminal && depth >= max_len {
                continue;
            }
            let logprob = node.logprob + p.ln();
            let nodes = &mut trellis.stages[stage];
            nodes.push(TrellisNode {
                symbol: sym,
                logprob,
                backpointer: node.at.map(|(_, i)| i),
            });
            let mut letters = node.letters.clone();
            if !terminal {
                letters.push(sym.to_char());
            }
            heap.push(Frontier {
                logprob,
                at: Some((stage, nodes.len() - 1)),
                letters,
                terminal,
            });
        }
    }
    trellis
        .completed
        .sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    trellis
}

/// Top `n` completions of the partial word, most probable first, ties
/// alphabetical. `max_len` bounds the number of letters added.
pub fn dijkstra_complete(lm: &LayeredLm, history: &str, n: usize, max_len: usize) -> Vec<Suggestion> {
    let mut trellis = dijkstra_trellis(lm, history, n, max_len);
    trellis.completed.truncate(n);
    trellis
        .completed
        .into_iter()
        .map(|(w, lp)| Suggestion::new(w, lp.exp()))
        .collect()
}

fn is_word(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}

/// Provider suggestions first, topped up with Dijkstra completions.
///
/// Provider words must extend the partial word and be distinct; their scores
/// are clamped to `[0, 1]`. Any provider failure is logged and the result
/// falls back to pure Dijkstra output.
pub fn layered_suggest(
    provider: Option<&mut (dyn SuggestionProvider + '_)>,
    lm: &LayeredLm,
    history: &str,
    n: usize,
    max_len: usize,
) -> Vec<Suggestion> {
    let prefix = partial_word(history);
    let mut out: Vec<Suggestion> = Vec::with_capacity(n);
    if let Some(p) = provider {
        match p.suggest(word_context(history), prefix, n) {
            Ok(words) => {
                for s in words {
                    if out.len() == n {
                        break;
                    }
                    if is_word(&s.word)
                        && s.word.starts_with(prefix)
                        && !out.iter().any(|o| o.word == s.word)
                    {
                        let prob = if s.prob.is_finite() { s.prob.clamp(0.0, 1.0) } else { 0.0 };
                        out.push(Suggestion::new(s.word, prob));
                    }
                }
            }
            Err(e) => log::warn!("suggester fallback to dijkstra: {e}"),
        }
    }
    if out.len() < n {
        // Ask for enough extra words to survive de-duplication.
        let extra = dijkstra_complete(lm, history, n + out.len(), max_len);
        for s in extra {
            if out.len() == n {
                break;
            }
            if !out.iter().any(|o| o.word == s.word) {
                out.push(s);
            }
        }
    }
    out
}

/// Character-bound prior: half the mass on `target`, the rest spread evenly.
pub fn oracle_char_dist(target: Symbol) -> CharDist {
    let mut dist = [0.5 / (ALPHABET_SIZE - 1) as f64; ALPHABET_SIZE];
    dist[target.index()] = 0.5;
    dist
}

/// Word-bound suggestion list: only the intended word, at probability 0.5.
pub fn oracle_word_suggest(target_word: &str, _n: usize) -> Vec<Suggestion> {
    if target_word.is_empty() {
        Vec::new()
    } else {
        vec![Suggestion::new(target_word, 0.5)]
    }
}
