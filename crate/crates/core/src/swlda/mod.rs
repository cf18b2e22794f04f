//! Flash features, stepwise LDA and score distributions.

mod cv;
mod io;
mod stepwise;

pub use cv::{score_ascv, score_wscv, split_ascv, split_wscv, Fold};
pub use io::{
    read_raw_subject, read_scored_subject, write_raw_subject, write_scored_subject, RawSubject,
    ScoredEpoch, ScoredSubject,
};
pub use stepwise::{swlda_fit, swlda_train, StepwiseConfig};

use statrs::statistics::Statistics;

use crate::decoder::GaussianParams;
use crate::error::{Error, Result};

pub const CHANNELS: usize = 32;
pub const SAMPLES_PER_EPOCH: usize = 154;
pub const DECIMATION: usize = 12;
pub const FEATURES_PER_CHANNEL: usize = SAMPLES_PER_EPOCH.div_ceil(DECIMATION);
pub const FEATURE_COUNT: usize = CHANNELS * FEATURES_PER_CHANNEL;

/// Electrode order of the 32-channel montage; features follow this order.
pub const MONTAGE: [&str; CHANNELS] = [
    "Fpz", "Fz", "FC1", "FCz", "FC2", "FC4", "FC6", "C4", "C6", "CP4", "CP6", "FC3", "FC5", "C3",
    "C5", "CP3", "CP5", "CP1", "P1", "Cz", "CPz", "Pz", "POz", "CP2", "P2", "PO7", "PO3", "O1",
    "Oz", "O2", "PO4", "PO8",
];

/// Feature vector of one flash epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochFeatures {
    pub values: Vec<f64>,
    pub attended: bool,
    pub subject_id: String,
    /// Position in the recorded flash sequence.
    pub sequence_index: usize,
    pub char_index: u32,
    pub flash_index: u32,
    pub group_id: u8,
}

/// Block means of 12 samples per channel (the last block holds 10).
///
/// `epoch` is channel-major: 32 runs of 154 samples.
pub fn extract_features(epoch: &[f64]) -> Result<Vec<f64>> {
    if epoch.len() != CHANNELS * SAMPLES_PER_EPOCH {
        return Err(Error::Shape {
            what: "epoch samples",
            expected: CHANNELS * SAMPLES_PER_EPOCH,
            got: epoch.len(),
        });
    }
    if let Some(bad) = epoch.iter().find(|v| !v.is_finite()) {
        return Err(Error::InsufficientData(format!("non-finite sample {bad}")));
    }
    Ok(epoch
        .chunks_exact(SAMPLES_PER_EPOCH)
        .flat_map(|channel| {
            channel
                .chunks(DECIMATION)
                .map(|block| block.iter().sum::<f64>() / block.len() as f64)
        })
        .collect())
}

/// Selected feature indices with their discriminant weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierWeights {
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl ClassifierWeights {
    /// Dot product of the weights with the selected features, plus intercept.
    pub fn score(&self, values: &[f64]) -> f64 {
        self.selected
            .iter()
            .zip(&self.weights)
            .map(|(&j, w)| w * values[j])
            .sum::<f64>()
            + self.intercept
    }
}

/// Sample mean and unbiased standard deviation of each label's scores.
pub fn fit_gaussians(scores: &[(f64, bool)]) -> Result<GaussianParams> {
    let pick = |attended: bool| -> Vec<f64> {
        scores
            .iter()
            .filter(|s| s.1 == attended)
            .map(|s| s.0)
            .collect()
    };
    let (a, n) = (pick(true), pick(false));
    if a.len() < 2 || n.len() < 2 {
        return Err(Error::DegenerateLabels(format!(
            "need two scores per label, got {} attended and {} non-attended",
            a.len(),
            n.len()
        )));
    }
    let (mu_a, sd_a) = (a.as_slice().mean(), a.as_slice().std_dev());
    let (mu_n, sd_n) = (n.as_slice().mean(), n.as_slice().std_dev());
    if sd_a <= 0.0 || sd_n <= 0.0 {
        return Err(Error::DegenerateScores("zero variance".into()));
    }
    GaussianParams::new(mu_a, sd_a, mu_n, sd_n)
}
