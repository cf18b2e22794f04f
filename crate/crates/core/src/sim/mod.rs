//! Passage typing simulation, metrics and batch runs.

mod batch;
mod config;
mod passage;

pub use batch::{
    load_subjects, run_batch, subject_seed, write_results, BatchRow, RESULTS_HEADER,
};
pub use config::{CvMode, Scheme, SimConfig};
pub use passage::{simulate_passage, SimResult};

use crate::decoder::GaussianParams;
use crate::error::{Error, Result};
use crate::signal::{build_pools, ScorePools, ScoredFlash};
use crate::swlda::{fit_gaussians, ScoredSubject};

/// Cells on the physical board.
pub const GRID_N: usize = 36;

/// Everything the simulator needs about one subject.
#[derive(Clone, Debug)]
pub struct SubjectModel {
    pub id: String,
    pub pools: ScorePools,
    pub params: GaussianParams,
}

impl SubjectModel {
    /// Pools and Gaussian fit from a pre-scored file, in file order.
    pub fn from_scored(subject: &ScoredSubject) -> Result<Self> {
        let flashes: Vec<ScoredFlash> = subject
            .epochs
            .iter()
            .map(|e| ScoredFlash {
                score: e.score,
                attended: e.attended,
            })
            .collect();
        let pools = build_pools(&flashes)?;
        let pairs: Vec<(f64, bool)> = flashes.iter().map(|f| (f.score, f.attended)).collect();
        let params = fit_gaussians(&pairs)?;
        if params.mu_a <= params.mu_n {
            log::warn!(
                "subject {}: attended mean {:.3} does not exceed non-attended mean {:.3}",
                subject.id,
                params.mu_a,
                params.mu_n
            );
        }
        Ok(SubjectModel {
            id: subject.id.clone(),
            pools,
            params,
        })
    }
}

/// One decoded selection.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRecord {
    pub intended: String,
    pub selected: String,
    pub scans_used: u32,
    pub flashes_used: u32,
    /// `flashes_used * soa_seconds`.
    pub elapsed_seconds: f64,
    /// Idle time after the selection; counts toward ITR time only.
    pub pause_seconds: f64,
    /// The selection was a Backspace.
    pub was_backspace_cycle: bool,
    pub abandoned: bool,
    /// Characters this selection placed that survive in the final text.
    pub credited_chars: u32,
}

/// Bits per minute over a whole run: `60 * log2(N + 1) * C / T`, where `C`
/// counts credited characters and `T` all flashing and pause time.
pub fn compute_itr(records: &[SelectionRecord], grid_n: usize) -> Result<f64> {
    let seconds: f64 = records
        .iter()
        .map(|r| r.elapsed_seconds + r.pause_seconds)
        .sum();
    if seconds <= 0.0 {
        return Err(Error::ZeroElapsed);
    }
    let chars: u64 = records.iter().map(|r| r.credited_chars as u64).sum();
    Ok(60.0 * ((grid_n + 1) as f64).log2() * chars as f64 / seconds)
}

/// Backspace selections per credited output character, capped at 1.
/// With no output at all the rate is 1.
pub fn compute_retry_rate(records: &[SelectionRecord]) -> f64 {
    let backspaces = records.iter().filter(|r| r.was_backspace_cycle).count();
    let chars: u64 = records.iter().map(|r| r.credited_chars as u64).sum();
    if chars == 0 {
        log::warn!("no characters communicated; retry rate set to 1");
        return 1.0;
    }
    (backspaces as f64 / chars as f64).min(1.0)
}
