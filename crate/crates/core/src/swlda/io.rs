//! Subject files.
//!
//! Raw: a header `subject,<id>,channels,32,samples_per_epoch,154`, then one
//! line per epoch `label,char_index,flash_index,group_id,<4928 samples>`
//! with samples channel-major.
//!
//! Pre-scored: an optional header `subject,<id>`, then
//! `label,char_index,flash_index,group_id,score`. Without the header the file
//! stem is the subject id.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{extract_features, EpochFeatures, CHANNELS, SAMPLES_PER_EPOCH};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RawSubject {
    pub id: String,
    pub epochs: Vec<EpochFeatures>,
}

/// One classifier output per recorded flash.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredEpoch {
    pub attended: bool,
    pub char_index: u32,
    pub flash_index: u32,
    pub group_id: u8,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSubject {
    pub id: String,
    pub epochs: Vec<ScoredEpoch>,
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path, line: usize, name: &str) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, line, format!("bad {name}")))
}

fn label(rec: &csv::StringRecord, path: &Path, line: usize) -> Result<bool> {
    match rec.get(0) {
        Some("1") => Ok(true),
        Some("0") => Ok(false),
        _ => Err(Error::parse(path, line, "label must be 0 or 1")),
    }
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

pub fn read_raw_subject(path: &Path) -> Result<RawSubject> {
    let mut rdr = reader(path)?;
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))??;
    let expect = |i: usize, v: &str| header.get(i) == Some(v);
    if !(expect(0, "subject")
        && expect(2, "channels")
        && expect(3, &CHANNELS.to_string())
        && expect(4, "samples_per_epoch")
        && expect(5, &SAMPLES_PER_EPOCH.to_string()))
    {
        return Err(Error::parse(
            path,
            1,
            format!("expected header subject,<id>,channels,{CHANNELS},samples_per_epoch,{SAMPLES_PER_EPOCH}"),
        ));
    }
    let id = header.get(1).unwrap_or_default().to_string();
    let width = 4 + CHANNELS * SAMPLES_PER_EPOCH;
    let mut epochs = Vec::new();
    let mut samples = Vec::with_capacity(CHANNELS * SAMPLES_PER_EPOCH);
    for rec in records {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != width {
            return Err(Error::parse(path, line, format!("expected {width} fields, got {}", rec.len())));
        }
        samples.clear();
        for i in 4..width {
            samples.push(field::<f64>(&rec, i, path, line, "sample")?);
        }
        epochs.push(EpochFeatures {
            values: extract_features(&samples).map_err(|e| Error::parse(path, line, e.to_string()))?,
            attended: label(&rec, path, line)?,
            subject_id: id.clone(),
            sequence_index: epochs.len(),
            char_index: field(&rec, 1, path, line, "char_index")?,
            flash_index: field(&rec, 2, path, line, "flash_index")?,
            group_id: field(&rec, 3, path, line, "group_id")?,
        });
    }
    Ok(RawSubject { id, epochs })
}

/// Write raw epochs given as `(label, char, flash, group, samples)`.
pub fn write_raw_subject(
    path: &Path,
    id: &str,
    epochs: impl IntoIterator<Item = (bool, u32, u32, u8, Vec<f64>)>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "subject,{id},channels,{CHANNELS},samples_per_epoch,{SAMPLES_PER_EPOCH}")?;
    for (attended, ch, flash, group, samples) in epochs {
        if samples.len() != CHANNELS * SAMPLES_PER_EPOCH {
            return Err(Error::Shape {
                what: "epoch samples",
                expected: CHANNELS * SAMPLES_PER_EPOCH,
                got: samples.len(),
            });
        }
        write!(out, "{},{ch},{flash},{group}", attended as u8)?;
        for s in samples {
            write!(out, ",{s}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_scored_subject(path: &Path) -> Result<ScoredSubject> {
    let mut rdr = reader(path)?;
    let mut id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut epochs = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.get(0) == Some("subject") {
            if !epochs.is_empty() || rec.len() < 2 {
                return Err(Error::parse(path, line, "misplaced subject header"));
            }
            id = rec[1].to_string();
            continue;
        }
        if rec.len() != 5 {
            return Err(Error::parse(path, line, format!("expected 5 fields, got {}", rec.len())));
        }
        let score: f64 = field(&rec, 4, path, line, "score")?;
        if !score.is_finite() {
            return Err(Error::parse(path, line, "non-finite score"));
        }
        epochs.push(ScoredEpoch {
            attended: label(&rec, path, line)?,
            char_index: field(&rec, 1, path, line, "char_index")?,
            flash_index: field(&rec, 2, path, line, "flash_index")?,
            group_id: field(&rec, 3, path, line, "group_id")?,
            score,
        });
    }
    Ok(ScoredSubject { id, epochs })
}

pub fn write_scored_subject(path: &Path, subject: &ScoredSubject) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "subject,{}", subject.id)?;
    for e in &subject.epochs {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.attended as u8, e.char_index, e.flash_index, e.group_id, e.score
        )?;
    }
    out.flush()?;
    Ok(())
}
