//! Batch runs over subjects and schemes, and the results file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use super::config::{CvMode, Scheme, SimConfig};
use super::passage::{simulate_passage, SimResult};
use super::SubjectModel;
use crate::error::{Error, Result};
use crate::lm::LayeredLm;
use crate::swlda::read_scored_subject;
use crate::wordpred::{SuggesterHandle, SuggestionProvider};

pub const RESULTS_HEADER: &str =
    "subject,scheme,cv_mode,itr_bits_per_min,retry_rate,chars_out,backspaces,abandoned,flashes,seconds,seed";

/// One (subject, scheme) run.
#[derive(Clone, Debug)]
pub struct BatchRow {
    pub subject: String,
    pub scheme: Scheme,
    pub seed: u64,
    pub outcome: std::result::Result<SimResult, String>,
}

/// Per-subject seed, shared by every scheme so schemes see the same streams.
pub fn subject_seed(base: u64, index: usize) -> u64 {
    base ^ index as u64
}

/// Pre-scored subject files under `dir`, or under `dir/<cv>` when that
/// directory exists, in file-name order. Files that fail to load are kept as
/// errors so the batch can report them.
pub fn load_subjects(dir: &Path, cv: CvMode) -> Result<Vec<(String, Result<SubjectModel>)>> {
    let nested = dir.join(cv.name());
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no subject files in {}",
            dir.display()
        )));
    }
    Ok(files
        .into_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match read_scored_subject(&path) {
                Ok(s) => (s.id.clone(), SubjectModel::from_scored(&s)),
                Err(e) => (stem, Err(e)),
            }
        })
        .collect())
}

fn write_trace(dir: &Path, result: &SimResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}_{}.csv", result.subject_id, result.scheme));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "index",
        "intended",
        "selected",
        "scans",
        "flashes",
        "elapsed_seconds",
        "backspace",
        "abandoned",
        "credited_chars",
    ])?;
    for (i, r) in result.records.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.intended.clone(),
            r.selected.clone(),
            r.scans_used.to_string(),
            r.flashes_used.to_string(),
            format!("{:.3}", r.elapsed_seconds),
            (r.was_backspace_cycle as u8).to_string(),
            (r.abandoned as u8).to_string(),
            r.credited_chars.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Simulate every subject under every configured scheme. Rows come back in
/// subject order, schemes in config order within a subject.
pub fn run_batch(
    cfg: &SimConfig,
    lm: &LayeredLm,
    passage: &str,
    subjects: &[(String, Result<SubjectModel>)],
) -> Vec<BatchRow> {
    let jobs: Vec<(usize, Scheme)> = (0..subjects.len())
        .flat_map(|i| cfg.schemes.iter().map(move |&s| (i, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, scheme)| {
            let (id, model) = &subjects[i];
            let seed = subject_seed(cfg.seed, i);
            let outcome = match model {
                Err(e) => Err(e.to_string()),
                Ok(model) => {
                    let mut handle = match (&cfg.suggester, scheme) {
                        (Some(t), Scheme::ExternalLlm) => {
                            SuggesterHandle::connect(t, Duration::from_millis(cfg.suggester_timeout_ms))
                                .map_err(|e| log::warn!("{id}: suggester unavailable, using dijkstra: {e}"))
                                .ok()
                        }
                        _ => None,
                    };
                    let provider = handle.as_mut().map(|h| h as &mut dyn SuggestionProvider);
                    simulate_passage(scheme, cfg, model, lm, passage, provider, seed)
                        .map_err(|e| e.to_string())
                }
            };
            match (&outcome, &cfg.trace_dir) {
                (Ok(r), Some(dir)) => {
                    if let Err(e) = write_trace(dir, r) {
                        log::warn!("{id}: cannot write trace: {e}");
                    }
                }
                (Err(e), _) => log::error!("{id} / {scheme}: {e}"),
                _ => {}
            }
            BatchRow {
                subject: id.clone(),
                scheme,
                seed,
                outcome,
            }
        })
        .collect()
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

fn metrics(r: &SimResult) -> [f64; 7] {
    [
        r.itr_bits_per_min,
        r.retry_rate,
        r.chars_out as f64,
        r.backspaces as f64,
        r.abandoned as f64,
        r.flashes as f64,
        r.seconds,
    ]
}

const PRECISION: [usize; 7] = [4, 6, 0, 0, 0, 0, 3];

/// Write one row per run, then a `summary` row per scheme holding
/// `mean±sd` over that scheme's successful runs.
pub fn write_results<W: Write>(out: W, cfg: &SimConfig, rows: &[BatchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER.split(','))?;
    for row in rows {
        let mut rec = vec![
            row.subject.clone(),
            row.scheme.to_string(),
            cfg.cv_mode.to_string(),
        ];
        match &row.outcome {
            Ok(r) => rec.extend(
                metrics(r)
                    .iter()
                    .zip(PRECISION)
                    .map(|(v, p)| format!("{v:.p$}")),
            ),
            Err(_) => rec.extend(std::iter::repeat_n("failed".to_string(), 7)),
        }
        rec.push(row.seed.to_string());
        w.write_record(&rec)?;
    }
    for &scheme in &cfg.schemes {
        let ok: Vec<[f64; 7]> = rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .filter_map(|r| r.outcome.as_ref().ok().map(metrics))
            .collect();
        let mut rec = vec!["summary".to_string(), scheme.to_string(), cfg.cv_mode.to_string()];
        for (k, p) in PRECISION.iter().enumerate() {
            if ok.is_empty() {
                rec.push("failed".into());
            } else {
                let col: Vec<f64> = ok.iter().map(|m| m[k]).collect();
                let (m, s) = mean_sd(&col);
                let p = (*p).max(2);
                rec.push(format!("{m:.p$}±{s:.p$}"));
            }
        }
        rec.push(cfg.seed.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
