//! Metaphor-paraphrase evaluation: triple datasets, scoring, rank correlation,
//! paraphrase accuracy and entropy reports.

mod report;
mod score;
mod stats;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compose::{Form, Fragment};
use crate::error::{Error, Result};
use crate::io;

pub use report::{
    entropy_ratio, evaluate, import_scores, report_csv, scores_from_external, EntropyRow,
    EvalReport, Evaluation,
};
pub use score::{score_model, Exclusion, Scores, SentenceModel, TripleScore, VectorModel};
pub use stats::{
    average_ranks, change_matrix, is_correct, paraphrase_accuracy, pearson, spearman_rho,
    ChangeMatrix,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no scores to evaluate")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("at least 2 observations are needed, got {0}")]
    TooShort(usize),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("baseline has no score for triple `{0}`")]
    MissingBaseline(String),
}

/// Highest accepted human rating (ratings are on a 1–7 scale or normalized to [0, 1]).
pub const MAX_RATING: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanRatings {
    pub apt: f64,
    pub inapt: f64,
}

/// A metaphorical target with an apt and an inapt literal paraphrase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple {
    pub id: String,
    pub form: Form,
    pub human: HumanRatings,
    pub target: Fragment,
    pub apt: Fragment,
    pub inapt: Fragment,
}

impl Triple {
    pub fn fragments(&self) -> [&Fragment; 3] {
        [&self.target, &self.apt, &self.inapt]
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        for (name, r) in [("apt", self.human.apt), ("inapt", self.human.inapt)] {
            if !r.is_finite() || !(0.0..=MAX_RATING).contains(&r) {
                return Err(format!(
                    "human rating `{name}` = {r} is outside [0, {MAX_RATING}]"
                ));
            }
        }
        let mut patterns = Vec::with_capacity(3);
        for (name, f) in [
            ("target", &self.target),
            ("apt", &self.apt),
            ("inapt", &self.inapt),
        ] {
            patterns.push(f.pattern().map_err(|e| format!("{name}: {e}"))?);
        }
        if patterns[0] != patterns[1] || patterns[0] != patterns[2] {
            return Err("target, apt and inapt must share one structural pattern".into());
        }
        Ok(())
    }
}

/// Parses a JSONL dataset. Triples are validated and sorted by id.
pub fn parse_triples(text: &str, path: &Path) -> Result<Vec<Triple>> {
    let mut out: Vec<Triple> = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: Triple =
            serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        t.validate()
            .map_err(|m| Error::parse(path, i + 1, format!("triple `{}`: {m}", t.id)))?;
        if !seen.insert(t.id.clone()) {
            return Err(Error::parse(
                path,
                i + 1,
                format!("duplicate id `{}`", t.id),
            ));
        }
        out.push(t);
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

pub fn load_triples(path: &Path) -> Result<Vec<Triple>> {
    parse_triples(&io::read_to_string(path)?, path)
}

/// One compact JSON object per line.
pub fn triples_to_jsonl(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&serde_json::to_string(t).expect("triples serialize"));
        out.push('\n');
    }
    out
}
