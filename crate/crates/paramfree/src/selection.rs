//! Model selection over a finite candidate set.
//!
//! Candidates are indexed 0..=K with index 0 reserved for the reference
//! model, whose confidence width is identically zero. Standard selection
//! minimizes the validation mean; reliable selection first builds a safe
//! set from width-inflated means and minimizes within it, which keeps
//! high-variance candidates from being picked on the strength of a lucky
//! validation draw.

use crate::concentration::sample_variance;
use crate::{Error, Result};

/// Per-sample validation losses for K+1 candidate models; column 0 is the
/// reference model.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    n: usize,
    k: usize,
    /// Row-major n x (k + 1).
    values: Vec<f64>,
}

impl LossMatrix {
    /// Build from rows; every row must hold K+1 finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidParameter("loss matrix must be nonempty".into()));
        }
        let cols = rows[0].len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::ShapeMismatch("ragged loss matrix".into()));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter("loss matrix has a non-finite entry".into()));
                }
                values.push(v);
            }
        }
        Ok(LossMatrix { n: rows.len(), k: cols - 1, values })
    }

    /// Build column-wise: `columns[k][i]` = f_i(x_k).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::InvalidParameter("loss matrix must be nonempty".into()));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::ShapeMismatch("ragged loss matrix".into()));
        }
        let mut values = Vec::with_capacity(n * columns.len());
        for i in 0..n {
            for c in columns {
                if !c[i].is_finite() {
                    return Err(Error::InvalidParameter("loss matrix has a non-finite entry".into()));
                }
                values.push(c[i]);
            }
        }
        Ok(LossMatrix { n, k: columns.len() - 1, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of candidates beyond the reference.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.values[i * (self.k + 1) + k]
    }

    /// Validation mean of candidate k.
    pub fn mean(&self, k: usize) -> f64 {
        (0..self.n).map(|i| self.entry(i, k)).sum::<f64>() / self.n as f64
    }

    pub fn means(&self) -> Vec<f64> {
        (0..=self.k).map(|k| self.mean(k)).collect()
    }

    /// Unbiased sample variance of the differences f_i(x_k) - f_i(x_0).
    pub fn diff_sample_variance(&self, k: usize) -> f64 {
        let diffs: Vec<f64> = (0..self.n).map(|i| self.entry(i, k) - self.entry(i, 0)).collect();
        sample_variance(&diffs)
    }
}

/// Provenance of a width rule.
#[derive(Debug, Clone, PartialEq)]
pub enum WidthRule {
    /// Empirical-Bennett widths from loss differences against the reference,
    /// union-bounded over candidates.
    Theory { delta: f64, lipschitz_hat: f64 },
    /// The aggressive practical rule sqrt(s_k^2)/(2 sqrt n) + M_k/(2n).
    Practical,
    /// Caller-supplied widths.
    Custom,
}

/// Evaluated confidence widths tau_0..tau_K with tau_0 = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceWidths {
    pub tau: Vec<f64>,
    pub rule: WidthRule,
}

impl ConfidenceWidths {
    pub fn custom(tau: Vec<f64>) -> Result<Self> {
        validate_tau(&tau)?;
        Ok(ConfidenceWidths { tau, rule: WidthRule::Custom })
    }
}

fn validate_tau(tau: &[f64]) -> Result<()> {
    if tau.is_empty() {
        return Err(Error::InvalidParameter("widths must be nonempty".into()));
    }
    if tau[0] != 0.0 {
        return Err(Error::InvalidParameter("reference width tau_0 must be exactly 0".into()));
    }
    if tau.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("widths must be finite and nonnegative".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMethod {
    Greedy,
    Reliable,
}

/// Outcome of a selection routine.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub chosen: usize,
    pub method: SelectionMethod,
    /// Threshold theta (reliable only).
    pub theta: Option<f64>,
    /// Safe set as sorted indices (reliable only).
    pub safe_set: Option<Vec<usize>>,
    pub means: Vec<f64>,
    pub tau: Option<Vec<f64>>,
    pub gamma: Option<f64>,
}

/// Standard model selection: argmin of the validation means, ties broken by
/// lowest index.
pub fn standard_select(losses: &LossMatrix) -> Result<SelectionOutcome> {
    let means = losses.means();
    let chosen = argmin(&means);
    Ok(SelectionOutcome {
        chosen,
        method: SelectionMethod::Greedy,
        theta: None,
        safe_set: None,
        means,
        tau: None,
        gamma: None,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Width rule tau_k = sqrt(2 c s_k^2 / n) + c * 14 L_hat ||x_k|| / (3(n-1))
/// with c = ln(4K/delta), from the empirical Bennett inequality applied to
/// the differences f_i(x_k) - f_i(x_0) and a union bound over candidates.
///
/// `x_norms` must hold K+1 norms measured in the geometry matching
/// `lipschitz_hat`; entry 0 is ignored. With K = 0 only tau_0 = 0 is
/// returned. `delta` is a per-call input, never ambient state, and the
/// downstream selection guarantee holds for a delta fixed before looking
/// at the data.
pub fn widths_theory(
    losses: &LossMatrix,
    lipschitz_hat: f64,
    x_norms: &[f64],
    delta: f64,
) -> Result<ConfidenceWidths> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    if lipschitz_hat < 0.0 {
        return Err(Error::InvalidParameter("lipschitz_hat must be nonnegative".into()));
    }
    if x_norms.len() != losses.k() + 1 {
        return Err(Error::ShapeMismatch("need one norm per candidate".into()));
    }
    let rule = WidthRule::Theory { delta, lipschitz_hat };
    if losses.k() == 0 {
        return Ok(ConfidenceWidths { tau: vec![0.0], rule });
    }
    if losses.n() < 2 {
        return Err(Error::TooFewSamples { need: 2, got: losses.n() });
    }
    let n = losses.n() as f64;
    let c = (4.0 * losses.k() as f64 / delta).ln();
    let mut tau = vec![0.0];
    for k in 1..=losses.k() {
        let s2 = losses.diff_sample_variance(k);
        tau.push((2.0 * c * s2 / n).sqrt() + c * 14.0 * lipschitz_hat * x_norms[k] / (3.0 * (n - 1.0)));
    }
    Ok(ConfidenceWidths { tau, rule })
}

/// Practical width rule tau_k = sqrt(s_k^2) / (2 sqrt n) + M_k / (2n), where
/// M_k bounds |f(x_k; S) - f(x_0; S)| over the sample space.
pub fn widths_practical(losses: &LossMatrix, m_values: &[f64]) -> Result<ConfidenceWidths> {
    if m_values.len() != losses.k() + 1 {
        return Err(Error::ShapeMismatch("need one M value per candidate".into()));
    }
    if m_values.iter().any(|m| *m < 0.0) {
        return Err(Error::InvalidParameter("M values must be nonnegative".into()));
    }
    if losses.n() < 2 && losses.k() > 0 {
        return Err(Error::TooFewSamples { need: 2, got: losses.n() });
    }
    let n = losses.n() as f64;
    let mut tau = vec![0.0];
    for k in 1..=losses.k() {
        let s2 = losses.diff_sample_variance(k);
        tau.push(s2.sqrt() / (2.0 * n.sqrt()) + m_values[k] / (2.0 * n));
    }
    Ok(ConfidenceWidths { tau, rule: WidthRule::Practical })
}

/// Reliable model selection.
///
/// theta = min_k (Fbar_k + gamma tau_k); the safe set F keeps candidates
/// with Fbar_k + tau_k <= theta; the winner minimizes Fbar over F, ties to
/// the lowest index. F is never empty: the theta-attaining index always
/// qualifies because tau_k <= gamma tau_k.
pub fn reliable_select(
    losses: &LossMatrix,
    widths: &ConfidenceWidths,
    gamma: f64,
) -> Result<SelectionOutcome> {
    if gamma < 1.0 {
        return Err(Error::InvalidParameter(format!("gamma must be at least 1, got {gamma}")));
    }
    validate_tau(&widths.tau)?;
    if widths.tau.len() != losses.k() + 1 {
        return Err(Error::ShapeMismatch("widths and loss matrix disagree on candidate count".into()));
    }
    let means = losses.means();
    let theta = means
        .iter()
        .zip(&widths.tau)
        .map(|(m, t)| m + gamma * t)
        .fold(f64::INFINITY, f64::min);
    let safe_set: Vec<usize> = (0..means.len())
        .filter(|&k| means[k] + widths.tau[k] <= theta)
        .collect();
    debug_assert!(!safe_set.is_empty());
    let chosen = safe_set
        .iter()
        .copied()
        .min_by(|&a, &b| means[a].partial_cmp(&means[b]).unwrap().then(a.cmp(&b)))
        .unwrap();
    Ok(SelectionOutcome {
        chosen,
        method: SelectionMethod::Reliable,
        theta: Some(theta),
        safe_set: Some(safe_set),
        means,
        tau: Some(widths.tau.clone()),
        gamma: Some(gamma),
    })
}
