//! One subject typing one passage under one scheme.
//!
//! The simulated user always knows the goal text. Each selection attempt
//! builds the board and prior for the current history, then flashes groups
//! until the decoder stops. A wrong selection leaves an error unit in the
//! output which the user then removes with Backspace. Every goal position
//! has a cumulative scan budget; when it runs out on a wrong selection the
//! unit is abandoned: pending errors are cleared and the unit is skipped
//! without credit.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Scheme, SimConfig};
use super::{compute_itr, compute_retry_rate, SelectionRecord, SubjectModel, GRID_N};
use crate::decoder::{check_stop, init_prior, DecoderConfig, Posterior};
use crate::error::{Error, Result};
use crate::flashboard::{
    layout_diagonal, layout_sequential, map_virtual, place_suggestions, CellContent, Flashboard,
    HighlightGroup, LayoutKind, ScanPolicy, GROUP_COUNT,
};
use crate::lm::{is_normalized, LayeredLm, Symbol};
use crate::signal::SamplerState;
use crate::wordpred::{
    dijkstra_complete, layered_suggest, oracle_char_dist, oracle_word_suggest, Suggestion,
    SuggestionProvider,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub subject_id: String,
    pub scheme: Scheme,
    pub itr_bits_per_min: f64,
    pub retry_rate: f64,
    pub records: Vec<SelectionRecord>,
    /// Output with abandoned units left out.
    pub final_text: String,
    /// Credited output characters.
    pub chars_out: u64,
    pub backspaces: usize,
    pub abandoned: usize,
    pub flashes: u64,
    /// Flashing plus pause time.
    pub seconds: f64,
}

#[derive(Clone, Debug)]
struct Unit {
    text: String,
    /// Goal position where the unit starts.
    start: usize,
    record: Option<usize>,
    erroneous: bool,
    abandoned: bool,
}

struct Output {
    goal: Vec<u8>,
    typed: String,
    units: Vec<Unit>,
    pos: usize,
    errors: usize,
}

impl Output {
    fn push(&mut self, text: String, record: Option<usize>) -> bool {
        let ok = self.errors == 0 && self.goal[self.pos..].starts_with(text.as_bytes());
        self.typed.push_str(&text);
        self.units.push(Unit {
            start: self.pos,
            text,
            record,
            erroneous: !ok,
            abandoned: false,
        });
        if ok {
            self.pos += self.units.last().unwrap().text.len();
        } else {
            self.errors += 1;
        }
        ok
    }

    fn pop(&mut self) -> Option<Unit> {
        let u = self.units.pop()?;
        self.typed.truncate(self.typed.len() - u.text.len());
        if u.erroneous {
            self.errors -= 1;
        } else {
            self.pos = u.start;
        }
        Some(u)
    }

    fn restore(&mut self, u: Unit) {
        self.typed.push_str(&u.text);
        self.pos = u.start + u.text.len();
        self.units.push(u);
    }

    fn skip(&mut self, len: usize) {
        let len = len.min(self.goal.len() - self.pos);
        if len == 0 {
            return;
        }
        let text = String::from_utf8(self.goal[self.pos..self.pos + len].to_vec()).unwrap();
        self.typed.push_str(&text);
        self.units.push(Unit {
            text,
            start: self.pos,
            record: None,
            erroneous: false,
            abandoned: true,
        });
        self.pos += len;
    }

    /// The goal word the cursor is in, and the length from the cursor to
    /// its end plus the following SPACE.
    fn intended_word(&self) -> (&str, usize) {
        let start = self.goal[..self.pos]
            .iter()
            .rposition(|&b| b == b' ')
            .map_or(0, |i| i + 1);
        let end = self.goal[self.pos..]
            .iter()
            .position(|&b| b == b' ')
            .map_or(self.goal.len(), |i| self.pos + i);
        let word = std::str::from_utf8(&self.goal[start..end]).unwrap();
        (word, (end + 1).min(self.goal.len()) - self.pos)
    }
}

/// Flash groups until the decoder stops. Returns the selected cell, scans
/// started and flashes shown.
///
/// The stopping rule is checked after every flash once the first full round
/// is over, so every cell has been flashed before any decision.
#[allow(clippy::too_many_arguments)]
fn run_selection(
    groups: &[HighlightGroup; GROUP_COUNT],
    mut post: Posterior,
    target: CellContent,
    policy: ScanPolicy,
    dcfg: &DecoderConfig,
    subject: &SubjectModel,
    sampler: &mut SamplerState,
    sched_rng: &mut ChaCha8Rng,
) -> Result<(CellContent, u32, u32)> {
    let mut scans = 0u32;
    let mut flashes = 0u32;
    loop {
        let order = policy.schedule_round(groups, &post.probs(), sched_rng);
        scans += 1;
        for (k, &gid) in order.iter().enumerate() {
            let g = &groups[gid as usize];
            let y = sampler.sample_score(&subject.pools, g.contains(target))?;
            post.update(g, y, &subject.params);
            flashes += 1;
            let done = if k + 1 == GROUP_COUNT { scans } else { scans - 1 };
            if log::log_enabled!(log::Level::Trace) {
                let (cell, p) = post.argmax();
                log::trace!("flash {flashes}: group {gid} y={y:.3} argmax={cell:?} p={p:.4}");
            }
            if done == 0 {
                continue;
            }
            if let Some(cell) = check_stop(&post, done, dcfg) {
                return Ok((cell, scans, flashes));
            }
        }
    }
}

/// Simulate typing `passage` (normalized) followed by a final SPACE.
///
/// `seed` drives both the score sampler and the random scan order, on
/// separate streams.
pub fn simulate_passage(
    scheme: Scheme,
    cfg: &SimConfig,
    subject: &SubjectModel,
    lm: &LayeredLm,
    passage: &str,
    mut provider: Option<&mut dyn SuggestionProvider>,
    seed: u64,
) -> Result<SimResult> {
    cfg.validate()?;
    if passage.is_empty() || !is_normalized(passage) {
        return Err(Error::Config("passage must be non-empty normalized text".into()));
    }
    let mut sampler = SamplerState::new(seed);
    let mut sched_rng = ChaCha8Rng::seed_from_u64(seed);
    sched_rng.set_stream(1);

    let physical_base = Flashboard::alphabetical();
    let mut out = Output {
        goal: format!("{passage} ").into_bytes(),
        typed: String::new(),
        units: Vec::new(),
        pos: 0,
        errors: 0,
    };
    let mut used = vec![0u32; out.goal.len() + 1];
    let mut abandoned_len: HashMap<usize, usize> = HashMap::new();
    let mut cache: HashMap<String, Vec<Suggestion>> = HashMap::new();
    let mut records: Vec<SelectionRecord> = Vec::new();

    while out.pos < out.goal.len() || out.errors > 0 {
        let pos = out.pos;
        if out.errors == 0 && used[pos] >= cfg.abandon_scans {
            // Backspace walked back over an abandoned unit.
            out.skip(abandoned_len.get(&pos).copied().unwrap_or(1));
            continue;
        }

        let next_sym = out.goal.get(pos).and_then(|&b| Symbol::from_byte(b));
        let letter_dist = match (scheme, next_sym) {
            (Scheme::CharBound, Some(s)) => oracle_char_dist(s),
            _ => lm.p_next(&out.typed),
        };
        let (word, word_rest) = out.intended_word();
        let suggestions: Vec<Suggestion> = match scheme {
            Scheme::WordBound if out.errors == 0 => oracle_word_suggest(word, cfg.suggestions_n),
            Scheme::Dijkstra => cache
                .entry(out.typed.clone())
                .or_insert_with(|| dijkstra_complete(lm, &out.typed, cfg.suggestions_n, cfg.max_len))
                .clone(),
            Scheme::ExternalLlm => {
                if !cache.contains_key(&out.typed) {
                    let s = layered_suggest(
                        provider.as_deref_mut(),
                        lm,
                        &out.typed,
                        cfg.suggestions_n,
                        cfg.max_len,
                    );
                    cache.insert(out.typed.clone(), s);
                }
                cache[&out.typed].clone()
            }
            _ => Vec::new(),
        };

        let words: Vec<String> = suggestions.iter().map(|s| s.word.clone()).collect();
        let slot = if out.errors == 0 {
            words.iter().position(|w| w == word)
        } else {
            None
        };
        let target = if out.errors > 0 {
            CellContent::Backspace
        } else if let Some(i) = slot {
            CellContent::SuggestionSlot(i as u8)
        } else {
            CellContent::from_symbol(next_sym.expect("cursor inside goal"))
        };

        let physical = place_suggestions(&physical_base, &words)?;
        let groups = match scheme.layout() {
            LayoutKind::Alphabetical => physical.groups(),
            LayoutKind::Sequential => map_virtual(&layout_sequential(&letter_dist)?, &physical)?.groups,
            LayoutKind::Diagonal => map_virtual(&layout_diagonal(&letter_dist)?, &physical)?.groups,
        };
        let prior = init_prior(&letter_dist, &physical, &suggestions, &cfg.decoder);
        let dcfg = DecoderConfig {
            max_scans: cfg.decoder.max_scans.min(cfg.abandon_scans.saturating_sub(used[pos]).max(1)),
            ..cfg.decoder
        };
        let (selected, scans, flashes) = run_selection(
            &groups,
            prior,
            target,
            scheme.policy(),
            &dcfg,
            subject,
            &mut sampler,
            &mut sched_rng,
        )?;
        used[pos] += scans;

        let idx = records.len();
        records.push(SelectionRecord {
            intended: physical.label(target),
            selected: physical.label(selected),
            scans_used: scans,
            flashes_used: flashes,
            elapsed_seconds: flashes as f64 * cfg.soa_seconds,
            pause_seconds: cfg.pause_seconds,
            was_backspace_cycle: selected == CellContent::Backspace,
            abandoned: false,
            credited_chars: 0,
        });

        let errors_before = out.errors;
        let mut popped = None;
        let correct = match selected {
            CellContent::Backspace => {
                popped = out.pop();
                errors_before > 0
            }
            CellContent::SuggestionSlot(i) => {
                let w = &words[i as usize];
                let partial = crate::wordpred::partial_word(&out.typed);
                let rest = w.strip_prefix(partial).unwrap_or(w);
                out.push(format!("{rest} "), Some(idx))
            }
            other => {
                let c = other.symbol().expect("letter or space").to_char();
                out.push(c.to_string(), Some(idx))
            }
        };

        // A spent budget abandons the position unless it ended resolved.
        if used[pos] >= cfg.abandon_scans && (!correct || out.errors > 0) {
            records[idx].abandoned = true;
            if let Some(u) = popped.filter(|u| !u.erroneous) {
                out.restore(u);
            }
            while out.errors > 0 {
                out.pop();
            }
            debug_assert_eq!(out.pos, pos);
            let len = if matches!(target, CellContent::SuggestionSlot(_)) { word_rest } else { 1 };
            abandoned_len.insert(pos, len);
            out.skip(len);
            log::debug!("{}: abandoned unit at goal position {pos}", subject.id);
        }
    }

    let mut final_text = String::with_capacity(out.typed.len());
    for u in &out.units {
        if u.abandoned {
            continue;
        }
        final_text.push_str(&u.text);
        if let Some(r) = u.record {
            records[r].credited_chars += u.text.len() as u32;
        }
    }
    let final_text = final_text.trim_end().to_string();

    let seconds: f64 = records.iter().map(|r| r.elapsed_seconds + r.pause_seconds).sum();
    Ok(SimResult {
        subject_id: subject.id.clone(),
        scheme,
        itr_bits_per_min: compute_itr(&records, GRID_N)?,
        retry_rate: compute_retry_rate(&records),
        chars_out: records.iter().map(|r| r.credited_chars as u64).sum(),
        backspaces: records.iter().filter(|r| r.was_backspace_cycle).count(),
        abandoned: records.iter().filter(|r| r.abandoned).count(),
        flashes: records.iter().map(|r| r.flashes_used as u64).sum(),
        seconds,
        final_text,
        records,
    })
}
