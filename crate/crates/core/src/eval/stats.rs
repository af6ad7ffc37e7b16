use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::score::TripleScore;
use super::EvalError;

/// 1-based ranks; tied values share the mean of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        let mean = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mean;
        }
        i = j;
    }
    ranks
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(EvalError::TooShort(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(EvalError::Undefined("non-finite input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::Undefined("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(EvalError::Undefined("non-finite input".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// The apt paraphrase must score strictly higher; ties are incorrect.
pub fn is_correct(sim_apt: f64, sim_inapt: f64) -> bool {
    sim_apt > sim_inapt
}

pub fn paraphrase_accuracy(scores: &[TripleScore]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = scores
        .iter()
        .filter(|s| is_correct(s.sim_apt, s.sim_inapt))
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// Outcome of composition relative to the verb-only baseline, per triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChangeMatrix {
    pub both_correct: usize,
    /// Correct with the verb alone, wrong after composition.
    pub verb_only_correct: usize,
    /// Wrong with the verb alone, correct after composition.
    pub composed_only_correct: usize,
    pub both_incorrect: usize,
}

impl ChangeMatrix {
    pub fn total(&self) -> usize {
        self.both_correct
            + self.verb_only_correct
            + self.composed_only_correct
            + self.both_incorrect
    }

    pub fn verb_correct(&self) -> usize {
        self.both_correct + self.verb_only_correct
    }

    pub fn composed_correct(&self) -> usize {
        self.both_correct + self.composed_only_correct
    }
}

/// Buckets every composed score against the baseline score with the same id.
pub fn change_matrix(
    composed: &[TripleScore],
    baseline: &[TripleScore],
) -> Result<ChangeMatrix, EvalError> {
    if composed.is_empty() {
        return Err(EvalError::Empty);
    }
    let base: HashMap<&str, &TripleScore> = baseline.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut m = ChangeMatrix::default();
    for s in composed {
        let b = base
            .get(s.id.as_str())
            .ok_or_else(|| EvalError::MissingBaseline(s.id.clone()))?;
        match (
            is_correct(b.sim_apt, b.sim_inapt),
            is_correct(s.sim_apt, s.sim_inapt),
        ) {
            (true, true) => m.both_correct += 1,
            (true, false) => m.verb_only_correct += 1,
            (false, true) => m.composed_only_correct += 1,
            (false, false) => m.both_incorrect += 1,
        }
    }
    Ok(m)
}
