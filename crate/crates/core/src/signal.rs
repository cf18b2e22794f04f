//! Two-state Markov resampling of recorded flash scores.
//!
//! Scores are pooled by (previous label, current label) over the recorded
//! flash sequence. A sampler remembers whether its last flash was attended
//! and draws from the matching pool, falling back to the label marginal
//! when a pool is empty.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Attended = 1, non-attended = 0.
fn state(attended: bool) -> usize {
    attended as usize
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScorePools {
    /// `pools[prev][cur]`.
    pub pools: [[Vec<f64>; 2]; 2],
    /// `marginals[cur]`, the union of `pools[0][cur]` and `pools[1][cur]`.
    pub marginals: [Vec<f64>; 2],
}

/// A recorded flash: its score and whether the target was in the group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredFlash {
    pub score: f64,
    pub attended: bool,
}

/// Pool consecutive pairs: flash `i` goes to `pools[label(i-1)][label(i)]`.
/// Input must be in original flash order.
pub fn build_pools(flashes: &[ScoredFlash]) -> Result<ScorePools> {
    if flashes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 scored flashes, got {}",
            flashes.len()
        )));
    }
    let mut pools = ScorePools::default();
    for pair in flashes.windows(2) {
        let (prev, cur) = (state(pair[0].attended), state(pair[1].attended));
        pools.pools[prev][cur].push(pair[1].score);
        pools.marginals[cur].push(pair[1].score);
    }
    Ok(pools)
}

impl ScorePools {
    pub fn len(&self) -> usize {
        self.marginals.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-worker sampling state.
#[derive(Clone, Debug)]
pub struct SamplerState {
    pub prev_attended: bool,
    pub rng: ChaCha8Rng,
}

impl SamplerState {
    pub fn new(seed: u64) -> Self {
        SamplerState {
            prev_attended: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Draw a recorded score for a flash whose attended status is `attended`.
    pub fn sample_score(&mut self, pools: &ScorePools, attended: bool) -> Result<f64> {
        let cur = state(attended);
        let pool = &pools.pools[state(self.prev_attended)][cur];
        let pool = if pool.is_empty() { &pools.marginals[cur] } else { pool };
        if pool.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no {} scores recorded",
                if attended { "attended" } else { "non-attended" }
            )));
        }
        let v = pool[self.rng.random_range(0..pool.len())];
        self.prev_attended = attended;
        Ok(v)
    }
}
