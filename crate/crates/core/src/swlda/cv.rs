//! Within-subject and across-subject cross-validated scoring.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::io::{RawSubject, ScoredEpoch, ScoredSubject};
use super::stepwise::{swlda_train, StepwiseConfig};
use super::EpochFeatures;
use crate::error::{Error, Result};

/// Indices into the epoch list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Three folds: each character's flashes are cut into three contiguous sets
/// in sequence order and fold `k` tests on set `k`.
///
/// Set sizes are `n/3, n/3, n - 2(n/3)`; a remainder is logged.
pub fn split_wscv(epochs: &[EpochFeatures]) -> Vec<Fold> {
    let mut by_char: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, e) in epochs.iter().enumerate() {
        by_char.entry(e.char_index).or_default().push(i);
    }
    let mut sets: [Vec<usize>; 3] = Default::default();
    for (ch, mut idx) in by_char {
        idx.sort_by_key(|&i| epochs[i].sequence_index);
        let third = idx.len() / 3;
        if idx.len() % 3 != 0 {
            log::warn!(
                "character {ch}: {} flashes not divisible by 3, remainder goes to the last set",
                idx.len()
            );
        }
        sets[0].extend_from_slice(&idx[..third]);
        sets[1].extend_from_slice(&idx[third..2 * third]);
        sets[2].extend_from_slice(&idx[2 * third..]);
    }
    (0..3)
        .map(|k| {
            let mut test = sets[k].clone();
            let mut train: Vec<usize> = (0..3).filter(|&o| o != k).flat_map(|o| sets[o].clone()).collect();
            test.sort_unstable();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect()
}

/// Leave-one-subject-out: everyone except `test` trains.
pub fn split_ascv<'a>(subjects: &'a [String], test: &str) -> Result<(Vec<&'a str>, &'a str)> {
    if subjects.len() < 2 {
        return Err(Error::InsufficientData(
            "across-subject validation needs at least two subjects".into(),
        ));
    }
    let held = subjects
        .iter()
        .find(|s| *s == test)
        .ok_or_else(|| Error::UnknownSubject(test.to_string()))?;
    let train = subjects
        .iter()
        .filter(|s| *s != test)
        .map(String::as_str)
        .collect();
    Ok((train, held.as_str()))
}

fn scored(e: &EpochFeatures, score: f64) -> ScoredEpoch {
    ScoredEpoch {
        attended: e.attended,
        char_index: e.char_index,
        flash_index: e.flash_index,
        group_id: e.group_id,
        score,
    }
}

/// Score every epoch of one subject with a classifier trained on the other
/// two sets of its fold. Output follows input order.
pub fn score_wscv(epochs: &[EpochFeatures], cfg: &StepwiseConfig) -> Result<Vec<ScoredEpoch>> {
    let mut scores = vec![f64::NAN; epochs.len()];
    for fold in split_wscv(epochs) {
        let train: Vec<EpochFeatures> = fold.train.iter().map(|&i| epochs[i].clone()).collect();
        let w = swlda_train(&train, cfg)?;
        for &i in &fold.test {
            scores[i] = w.score(&epochs[i].values);
        }
    }
    Ok(epochs.iter().zip(scores).map(|(e, s)| scored(e, s)).collect())
}

/// Score each subject with a classifier trained on all the others.
pub fn score_ascv(subjects: &[RawSubject], cfg: &StepwiseConfig) -> Result<Vec<ScoredSubject>> {
    let ids: Vec<String> = subjects.iter().map(|s| s.id.clone()).collect();
    subjects
        .par_iter()
        .map(|held| {
            let (train_ids, _) = split_ascv(&ids, &held.id)?;
            let train: Vec<EpochFeatures> = subjects
                .iter()
                .filter(|s| train_ids.contains(&s.id.as_str()))
                .flat_map(|s| s.epochs.iter().cloned())
                .collect();
            let w = swlda_train(&train, cfg)?;
            Ok(ScoredSubject {
                id: held.id.clone(),
                epochs: held.epochs.iter().map(|e| scored(e, w.score(&e.values))).collect(),
            })
        })
        .collect()
}
