//! Stepwise least-squares feature selection.
//!
//! Labels are coded +1 / -1 and regressed on an intercept plus the selected
//! features. Entry candidates are residualized against the current design
//! with incremental Gram-Schmidt, so the partial F of every candidate costs
//! one dot product per step. Removal uses the full OLS fit.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{ClassifierWeights, EpochFeatures};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepwiseConfig {
    /// Entry threshold on the Bonferroni-adjusted p-value.
    pub p_enter: f64,
    /// Removal threshold on the raw p-value.
    pub p_remove: f64,
    pub max_features: usize,
}

impl Default for StepwiseConfig {
    fn default() -> Self {
        StepwiseConfig {
            p_enter: 0.1,
            p_remove: 0.15,
            max_features: 60,
        }
    }
}

/// A candidate whose residual keeps less than this share of its centered
/// energy is treated as collinear with the current design.
const RANK_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn f_sf(f: f64, df2: f64) -> f64 {
    if !f.is_finite() {
        return 0.0;
    }
    FisherSnedecor::new(1.0, df2).map(|d| d.sf(f)).unwrap_or(1.0)
}

struct State<'a> {
    n: usize,
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    /// Centered energy of each column.
    base: Vec<f64>,
    selected: Vec<usize>,
    /// Orthonormal basis of the intercept and selected columns.
    basis: Vec<Vec<f64>>,
    /// Columns with the basis projected out.
    resid_cols: Vec<Vec<f64>>,
    resid_y: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(columns: &'a [Vec<f64>], y: &'a [f64]) -> Self {
        let n = y.len();
        let base = columns
            .iter()
            .map(|c| {
                let m = c.iter().sum::<f64>() / n as f64;
                c.iter().map(|v| (v - m) * (v - m)).sum()
            })
            .collect();
        let mut s = State {
            n,
            columns,
            y,
            base,
            selected: Vec::new(),
            basis: Vec::new(),
            resid_cols: Vec::new(),
            resid_y: Vec::new(),
        };
        s.rebuild();
        s
    }

    fn rebuild(&mut self) {
        self.basis.clear();
        self.resid_cols = self.columns.to_vec();
        self.resid_y = self.y.to_vec();
        let one = vec![1.0 / (self.n as f64).sqrt(); self.n];
        self.push_basis(one);
        for k in 0..self.selected.len() {
            let j = self.selected[k];
            let e = self.resid_cols[j].clone();
            let norm = dot(&e, &e).sqrt();
            self.push_basis(e.iter().map(|v| v / norm).collect());
        }
    }

    fn push_basis(&mut self, q: Vec<f64>) {
        for col in self.resid_cols.iter_mut() {
            let c = dot(&q, col);
            col.iter_mut().zip(&q).for_each(|(v, qi)| *v -= c * qi);
        }
        let c = dot(&q, &self.resid_y);
        self.resid_y.iter_mut().zip(&q).for_each(|(v, qi)| *v -= c * qi);
        self.basis.push(q);
    }

    /// Try to add one feature. Returns whether the selection changed.
    fn forward(&mut self, cfg: &StepwiseConfig) -> bool {
        let k = self.selected.len();
        if self.n < k + 3 {
            return false;
        }
        let df2 = (self.n - k - 2) as f64;
        let rss = dot(&self.resid_y, &self.resid_y);
        let mut eligible = 0usize;
        let mut best: Option<(usize, f64)> = None;
        for (j, e) in self.resid_cols.iter().enumerate() {
            if self.selected.contains(&j) || self.base[j] <= 0.0 {
                continue;
            }
            let ee = dot(e, e);
            if ee < RANK_TOL * self.base[j] {
                continue;
            }
            eligible += 1;
            let er = dot(e, &self.resid_y);
            let gain = er * er / ee;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let Some((j, gain)) = best else {
            return false;
        };
        let rest = rss - gain;
        let f = if rest > 0.0 { gain / (rest / df2) } else { f64::INFINITY };
        let p_adj = (f_sf(f, df2) * eligible as f64).min(1.0);
        if p_adj >= cfg.p_enter {
            return false;
        }
        log::trace!("swlda: enter feature {j} (F = {f:.3}, adjusted p = {p_adj:.3e})");
        let e = &self.resid_cols[j];
        let norm = dot(e, e).sqrt();
        let q = e.iter().map(|v| v / norm).collect();
        self.selected.push(j);
        self.push_basis(q);
        true
    }

    /// OLS on the intercept plus selected columns: coefficients and the
    /// diagonal of the inverse Gram matrix.
    fn ols(&self) -> Option<(DVector<f64>, DVector<f64>, f64)> {
        let k = self.selected.len();
        let a = DMatrix::from_fn(self.n, k + 1, |i, c| {
            if c == 0 {
                1.0
            } else {
                self.columns[self.selected[c - 1]][i]
            }
        });
        let y = DVector::from_column_slice(self.y);
        let gram = a.tr_mul(&a);
        let inv = gram.cholesky()?.inverse();
        let beta = &inv * a.tr_mul(&y);
        let resid = y - &a * &beta;
        Some((beta, inv.diagonal(), resid.norm_squared()))
    }

    /// Drop the least significant feature if its p-value exceeds `p_remove`.
    fn backward(&mut self, cfg: &StepwiseConfig) -> bool {
        let k = self.selected.len();
        if k == 0 {
            return false;
        }
        let Some((beta, diag, rss)) = self.ols() else {
            // Numerically singular despite the guard: undo the latest entry.
            let j = self.selected.pop().unwrap();
            log::debug!("swlda: dropping feature {j}, singular design");
            self.rebuild();
            return true;
        };
        if self.n <= k + 1 {
            return false;
        }
        let df = (self.n - k - 1) as f64;
        let sigma2 = rss / df;
        let mut worst: Option<(usize, f64)> = None;
        for c in 0..k {
            let f = if sigma2 > 0.0 {
                beta[c + 1] * beta[c + 1] / (sigma2 * diag[c + 1])
            } else {
                f64::INFINITY
            };
            let p = f_sf(f, df);
            if worst.is_none_or(|(_, wp)| p > wp) {
                worst = Some((c, p));
            }
        }
        match worst {
            Some((c, p)) if p > cfg.p_remove => {
                let j = self.selected.remove(c);
                log::trace!("swlda: remove feature {j} (p = {p:.3})");
                self.rebuild();
                true
            }
            _ => false,
        }
    }
}

/// Train on row-major feature vectors with attended flags.
pub fn swlda_fit(rows: &[&[f64]], attended: &[bool], cfg: &StepwiseConfig) -> Result<ClassifierWeights> {
    if rows.len() != attended.len() {
        return Err(Error::Shape {
            what: "labels",
            expected: rows.len(),
            got: attended.len(),
        });
    }
    let pos = attended.iter().filter(|&&a| a).count();
    if pos == 0 || pos == attended.len() {
        return Err(Error::DegenerateLabels(format!(
            "{pos} attended of {} epochs",
            attended.len()
        )));
    }
    let p = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::Shape {
            what: "feature vector",
            expected: p,
            got: r.len(),
        });
    }
    let columns: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let y: Vec<f64> = attended.iter().map(|&a| if a { 1.0 } else { -1.0 }).collect();

    let mut state = State::new(&columns, &y);
    let cap = 4 * cfg.max_features + 16;
    for _ in 0..cap {
        let mut changed = false;
        if state.selected.len() < cfg.max_features {
            changed |= state.forward(cfg);
        }
        changed |= state.backward(cfg);
        if !changed {
            break;
        }
    }

    if state.selected.is_empty() {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        return Ok(ClassifierWeights {
            selected: Vec::new(),
            weights: Vec::new(),
            intercept: mean,
        });
    }
    let (beta, _, _) = state
        .ols()
        .ok_or_else(|| Error::InsufficientData("singular final design".into()))?;
    Ok(ClassifierWeights {
        selected: state.selected.clone(),
        weights: beta.iter().skip(1).copied().collect(),
        intercept: beta[0],
    })
}

/// Stepwise LDA on extracted epochs.
pub fn swlda_train(data: &[EpochFeatures], cfg: &StepwiseConfig) -> Result<ClassifierWeights> {
    if data.is_empty() {
        return Err(Error::DegenerateLabels("no epochs".into()));
    }
    let rows: Vec<&[f64]> = data.iter().map(|e| e.values.as_slice()).collect();
    let labels: Vec<bool> = data.iter().map(|e| e.attended).collect();
    swlda_fit(&rows, &labels, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows)
            .map(|_| (0..cols).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn exact_linear_model() {
        // y = sign, feature 2 equals the coded label exactly.
        let mut x = noise(60, 5, 1);
        let labels: Vec<bool> = (0..60).map(|i| i % 3 == 0).collect();
        for (r, &a) in x.iter_mut().zip(&labels) {
            r[2] = if a { 1.0 } else { -1.0 };
        }
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let w = swlda_fit(&rows, &labels, &StepwiseConfig::default()).unwrap();
        assert_eq!(w.selected, vec![2]);
        assert!((w.weights[0] - 1.0).abs() < 1e-9);
        assert!(w.intercept.abs() < 1e-9);
    }

    #[test]
    fn duplicate_columns_enter_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<bool> = (0..400).map(|i| i % 2 == 0).collect();
        let mut x = noise(400, 8, 6);
        for (r, &a) in x.iter_mut().zip(&labels) {
            let z: f64 = StandardNormal.sample(&mut rng);
            r[3] = if a { 3.0 } else { -3.0 } + z;
            r[4] = r[3];
        }
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let w = swlda_fit(&rows, &labels, &StepwiseConfig::default()).unwrap();
        let hits = w.selected.iter().filter(|&&j| j == 3 || j == 4).count();
        assert_eq!(hits, 1, "{:?}", w.selected);
    }

    #[test]
    fn ols_weights_match_normal_equations() {
        let x = noise(80, 3, 9);
        let labels: Vec<bool> = x.iter().map(|r| r[0] + 0.5 * r[1] > 0.0).collect();
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let cfg = StepwiseConfig {
            p_enter: 1.0,
            p_remove: 1.0,
            max_features: 3,
        };
        let w = swlda_fit(&rows, &labels, &cfg).unwrap();
        assert_eq!(w.selected.len(), 3);
        // Residuals of a least-squares fit are orthogonal to every regressor.
        let resid: Vec<f64> = rows
            .iter()
            .zip(&labels)
            .map(|(r, &a)| if a { 1.0 } else { -1.0 } - w.score(r))
            .collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-9);
        for j in 0..3 {
            let s: f64 = rows.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            assert!(s.abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let x = noise(10, 2, 1);
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        assert!(matches!(
            swlda_fit(&rows, &[true; 10], &StepwiseConfig::default()),
            Err(Error::DegenerateLabels(_))
        ));
        let constant = vec![vec![1.0, 1.0]; 10];
        let rows: Vec<&[f64]> = constant.iter().map(Vec::as_slice).collect();
        let labels: Vec<bool> = (0..10).map(|i| i < 5).collect();
        let w = swlda_fit(&rows, &labels, &StepwiseConfig::default()).unwrap();
        assert!(w.selected.is_empty());
        assert_eq!(w.intercept, 0.0);
    }
}
