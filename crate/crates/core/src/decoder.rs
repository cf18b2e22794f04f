//! Bayesian posterior over board cells with dynamic stopping.
//!
//! The posterior is held as unnormalized log-weights indexed by cell content.
//! A flash on group `G` with score `y` multiplies every cell by its Gaussian
//! likelihood; since all non-members share the same factor, only members are
//! touched, by `log f_a(y) - log f_n(y)`. Normalization happens on read.

use statrs::distribution::{Continuous, Normal};

use crate::error::{Error, Result};
use crate::flashboard::{CellContent, Flashboard, HighlightGroup, CELL_COUNT};
use crate::lm::CharDist;
use crate::wordpred::Suggestion;

/// Attended / non-attended score distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianParams {
    pub mu_a: f64,
    pub sigma_a: f64,
    pub mu_n: f64,
    pub sigma_n: f64,
}

impl GaussianParams {
    pub fn new(mu_a: f64, sigma_a: f64, mu_n: f64, sigma_n: f64) -> Result<Self> {
        let ok = |s: f64| s.is_finite() && s > 0.0;
        if !(ok(sigma_a) && ok(sigma_n) && mu_a.is_finite() && mu_n.is_finite()) {
            return Err(Error::DegenerateScores(format!(
                "invalid gaussian parameters a=({mu_a}, {sigma_a}) n=({mu_n}, {sigma_n})"
            )));
        }
        Ok(GaussianParams {
            mu_a,
            sigma_a,
            mu_n,
            sigma_n,
        })
    }

    fn normal(&self, in_group: bool) -> Normal {
        let (mu, sigma) = if in_group {
            (self.mu_a, self.sigma_a)
        } else {
            (self.mu_n, self.sigma_n)
        };
        Normal::new(mu, sigma).expect("validated parameters")
    }

    /// `log f_a(y) - log f_n(y)`; exactly zero when both distributions match.
    pub fn log_ratio(&self, y: f64) -> f64 {
        if self.mu_a == self.mu_n && self.sigma_a == self.sigma_n {
            return 0.0;
        }
        self.normal(true).ln_pdf(y) - self.normal(false).ln_pdf(y)
    }
}

/// Density of `y` under the attended (`in_group`) or non-attended Gaussian.
pub fn likelihood(y: f64, in_group: bool, params: &GaussianParams) -> f64 {
    params.normal(in_group).pdf(y)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    pub p_thresh: f64,
    /// Scan rounds allowed per selection attempt.
    pub max_scans: u32,
    pub backspace_prior: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            p_thresh: 0.95,
            max_scans: 75,
            backspace_prior: 0.005,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_thresh > 0.5 && self.p_thresh < 1.0) {
            return Err(Error::Config(format!("p_thresh {} outside (0.5, 1)", self.p_thresh)));
        }
        if self.max_scans == 0 {
            return Err(Error::Config("max_scans must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.backspace_prior) {
            return Err(Error::Config(format!(
                "backspace_prior {} outside [0, 1)",
                self.backspace_prior
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    /// Log-weights by content index; inert cells are `-inf`.
    log_w: [f64; CELL_COUNT],
}

impl Posterior {
    /// Posterior from non-negative masses by content index.
    pub fn from_masses(masses: &[f64; CELL_COUNT]) -> Self {
        let mut log_w = masses.map(|m| if m > 0.0 { m.ln() } else { f64::NEG_INFINITY });
        recenter(&mut log_w);
        Posterior { log_w }
    }

    pub fn log_weights(&self) -> &[f64; CELL_COUNT] {
        &self.log_w
    }

    pub fn probs(&self) -> [f64; CELL_COUNT] {
        let z = log_sum_exp(&self.log_w);
        self.log_w.map(|w| if w == f64::NEG_INFINITY { 0.0 } else { (w - z).exp() })
    }

    pub fn prob(&self, content: CellContent) -> f64 {
        self.probs()[content.index()]
    }

    /// Most probable cell; the lowest content index wins ties.
    pub fn argmax(&self) -> (CellContent, f64) {
        let probs = self.probs();
        let mut best = 0;
        for i in 1..CELL_COUNT {
            if probs[i] > probs[best] {
                best = i;
            }
        }
        (CellContent::from_index(best).unwrap(), probs[best])
    }

    /// Fold in one flash of `group` that produced score `y`.
    pub fn update(&mut self, group: &HighlightGroup, y: f64, params: &GaussianParams) {
        let r = params.log_ratio(y);
        if r == 0.0 {
            return;
        }
        for (i, w) in self.log_w.iter_mut().enumerate() {
            if group.mask & (1 << i) != 0 {
                *w += r;
            }
        }
        recenter(&mut self.log_w);
    }
}

fn log_sum_exp(w: &[f64; CELL_COUNT]) -> f64 {
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + w.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

fn recenter(w: &mut [f64; CELL_COUNT]) {
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_finite() && m != 0.0 {
        w.iter_mut().for_each(|x| *x -= m);
    }
}

/// Prior over the cells of `board`: letters and SPACE take `lm_dist`, each
/// filled suggestion slot its suggestion probability, Backspace the
/// configured prior; the rest is inert. Renormalized jointly.
pub fn init_prior(
    lm_dist: &CharDist,
    board: &Flashboard,
    suggestions: &[Suggestion],
    config: &DecoderConfig,
) -> Posterior {
    let mut masses = [0.0; CELL_COUNT];
    masses[..lm_dist.len()].copy_from_slice(lm_dist);
    masses[CellContent::Backspace.index()] = config.backspace_prior;
    for (slot, s) in suggestions.iter().enumerate().take(crate::flashboard::MAX_SUGGESTIONS) {
        let content = CellContent::SuggestionSlot(slot as u8);
        if board.is_active(content) {
            masses[content.index()] = s.prob.max(0.0);
        }
    }
    Posterior::from_masses(&masses)
}

/// Selected cell once the posterior clears the threshold or the scan budget
/// is spent.
pub fn check_stop(post: &Posterior, scans_done: u32, config: &DecoderConfig) -> Option<CellContent> {
    let (cell, p) = post.argmax();
    (p >= config.p_thresh || scans_done >= config.max_scans).then_some(cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flashboard::place_suggestions;
    use crate::lm::{Symbol, ALPHABET_SIZE};

    fn params() -> GaussianParams {
        GaussianParams::new(1.0, 0.5, -1.0, 0.8).unwrap()
    }

    #[test]
    fn likelihood_shape() {
        let p = params();
        let peak = 1.0 / (0.5 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((likelihood(1.0, true, &p) - peak).abs() < 1e-14);
        let peak_n = 1.0 / (0.8 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((likelihood(-1.0, false, &p) - peak_n).abs() < 1e-14);
        assert!((likelihood(1.7, true, &p) - likelihood(0.3, true, &p)).abs() < 1e-15);
        assert!(GaussianParams::new(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn prior_construction() {
        let board = Flashboard::alphabetical();
        let mut lm = [0.0; ALPHABET_SIZE];
        for (i, p) in lm.iter_mut().enumerate() {
            *p = (i + 1) as f64 / 378.0;
        }
        let cfg = DecoderConfig {
            backspace_prior: 0.0,
            ..Default::default()
        };
        let post = init_prior(&lm, &board, &[], &cfg);
        let probs = post.probs();
        for i in 0..ALPHABET_SIZE {
            assert!((probs[i] - lm[i]).abs() < 1e-15);
        }
        assert!(probs[ALPHABET_SIZE..].iter().all(|&p| p == 0.0));

        // Uniform letters plus an oracle word suggestion.
        let uniform = [1.0 / 27.0; ALPHABET_SIZE];
        let s = vec![Suggestion::new("cat", 0.5)];
        let b = place_suggestions(&board, &["cat".to_string()]).unwrap();
        let post = init_prior(&uniform, &b, &s, &DecoderConfig::default());
        let probs = post.probs();
        let slot = probs[CellContent::SuggestionSlot(0).index()];
        // 0.5 / (1 + 0.5 + 0.005)
        assert!((slot - 0.5 / 1.505).abs() < 1e-15);
        assert!(probs[..ALPHABET_SIZE].iter().all(|&p| slot >= p));
        assert_eq!(probs[CellContent::SuggestionSlot(1).index()], 0.0);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn updates() {
        let board = Flashboard::alphabetical();
        let groups = board.groups();
        let prior = init_prior(&[1.0 / 27.0; ALPHABET_SIZE], &board, &[], &DecoderConfig::default());

        let flat = GaussianParams::new(0.3, 1.0, 0.3, 1.0).unwrap();
        let mut same = prior.clone();
        for (i, g) in groups.iter().enumerate() {
            same.update(g, i as f64 - 4.0, &flat);
        }
        assert_eq!(same, prior);

        // Well above mu_a with a shared sigma.
        let mut up = prior.clone();
        up.update(&groups[0], 5.0, &GaussianParams::new(1.0, 0.8, -1.0, 0.8).unwrap());
        let a = Symbol::from_char('a').unwrap().index();
        let g = Symbol::from_char('g').unwrap().index();
        let (before, after) = (prior.probs(), up.probs());
        assert!(after[a] / after[g] > before[a] / before[g]);

        let mut ab = prior.clone();
        ab.update(&groups[1], 0.4, &params());
        ab.update(&groups[7], -2.0, &params());
        let mut ba = prior.clone();
        ba.update(&groups[7], -2.0, &params());
        ba.update(&groups[1], 0.4, &params());
        for (x, y) in ab.log_weights().iter().zip(ba.log_weights()) {
            assert!(x == y || (x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn stopping() {
        let cfg = DecoderConfig::default();
        let mut m = [0.0; CELL_COUNT];
        m[4] = 0.96;
        m[5] = 0.04;
        let post = Posterior::from_masses(&m);
        assert_eq!(check_stop(&post, 0, &cfg), CellContent::from_index(4));

        let mut m = [0.0; CELL_COUNT];
        m[2] = 0.3;
        m[3] = 0.3;
        m[9] = 0.2;
        m[10] = 0.2;
        let post = Posterior::from_masses(&m);
        assert_eq!(check_stop(&post, 75, &cfg), CellContent::from_index(2));
        assert_eq!(check_stop(&post, 74, &cfg), None);
        assert!(DecoderConfig { p_thresh: 0.4, ..cfg }.validate().is_err());
    }
}
