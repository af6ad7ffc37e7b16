use std::collections::BTreeSet;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Triple;
use crate::compose::{
    compose_fragment, required_lemmas, ComposeConfig, ComposeError, ComposeResult, Form, Fragment,
    Method,
};
use crate::error::Result;
use crate::linalg::{DensityMatrix, SimMode};
use crate::store::MatrixLookup;
use crate::vectors::WordVectors;

/// Anything that turns fragments into comparable sentence representations.
pub trait SentenceModel: Sync {
    type Repr: Send;

    fn contains(&self, lemma: &str) -> bool;
    fn compose(&self, fragment: &Fragment, config: &ComposeConfig) -> ComposeResult<Self::Repr>;
    fn similarity(&self, a: &Self::Repr, b: &Self::Repr, mode: SimMode) -> f64;
    /// Von Neumann entropy where the representation has one.
    fn entropy(&self, repr: &Self::Repr) -> Option<f64>;
    fn verb_entropy(&self, fragment: &Fragment) -> Option<f64>;
}

impl<L: MatrixLookup + Sync> SentenceModel for L {
    type Repr = DensityMatrix;

    fn contains(&self, lemma: &str) -> bool {
        self.lookup(lemma).is_some()
    }

    fn compose(&self, fragment: &Fragment, config: &ComposeConfig) -> ComposeResult<DensityMatrix> {
        compose_fragment(fragment, self, config)
    }

    fn similarity(&self, a: &DensityMatrix, b: &DensityMatrix, mode: SimMode) -> f64 {
        a.similarity(b, mode)
            .expect("matrices from one store share a dimension")
    }

    fn entropy(&self, repr: &DensityMatrix) -> Option<f64> {
        Some(repr.entropy())
    }

    fn verb_entropy(&self, fragment: &Fragment) -> Option<f64> {
        fragment
            .verb()
            .and_then(|v| self.lookup(&v.lemma))
            .map(DensityMatrix::entropy)
    }
}

/// Word vectors composed by sum or entrywise product and compared by cosine.
#[derive(Debug, Clone, Copy)]
pub struct VectorModel<'a>(pub &'a WordVectors);

impl SentenceModel for VectorModel<'_> {
    type Repr = DVector<f64>;

    fn contains(&self, lemma: &str) -> bool {
        self.0.contains(lemma)
    }

    fn compose(&self, fragment: &Fragment, config: &ComposeConfig) -> ComposeResult<DVector<f64>> {
        fragment.pattern()?;
        let lemmas = required_lemmas(fragment, config);
        let missing: Vec<String> = lemmas
            .iter()
            .filter(|l| !self.0.contains(l))
            .map(|l| l.to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !missing.is_empty() {
            return Err(ComposeError::Oov(missing));
        }
        let vec = |l: &str| self.0.vector(l).expect("presence checked");
        match config.method {
            Method::VerbOnly => Ok(vec(&fragment.verb().expect("pattern has a verb").lemma)),
            Method::Add => Ok(lemmas
                .iter()
                .map(|l| vec(l))
                .fold(DVector::zeros(self.0.dim()), |a, v| a + v)),
            Method::Mult => Ok(lemmas
                .iter()
                .map(|l| vec(l))
                .reduce(|a, v| a.component_mul(&v))
                .expect("fragment has a verb")),
            Method::Fuzz => Err(ComposeError::Unsupported("fuzz on vectors")),
            Method::Phaser => Err(ComposeError::Unsupported("phaser on vectors")),
        }
    }

    fn similarity(&self, a: &DVector<f64>, b: &DVector<f64>, _mode: SimMode) -> f64 {
        let denom = a.norm() * b.norm();
        if denom > 0.0 {
            a.dot(b) / denom
        } else {
            0.0
        }
    }

    fn entropy(&self, _repr: &DVector<f64>) -> Option<f64> {
        None
    }

    fn verb_entropy(&self, _fragment: &Fragment) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleScore {
    pub id: String,
    pub form: Form,
    pub sim_apt: f64,
    pub sim_inapt: f64,
    pub human_apt: f64,
    pub human_inapt: f64,
    /// Mean entropy of the three verbs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entropy_verb: Option<f64>,
    /// Mean entropy of the three composed fragments.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entropy_composed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub rows: Vec<TripleScore>,
    pub excluded: Vec<Exclusion>,
}

enum Outcome {
    Scored(TripleScore),
    Excluded(Exclusion),
}

/// Scores every triple in parallel. A triple with any unknown lemma in any of
/// its fragments is excluded as `oov:<lemmas>`; a degenerate composition is
/// excluded as `degenerate`.
pub fn score_model<M: SentenceModel>(
    triples: &[Triple],
    model: &M,
    config: &ComposeConfig,
    sim: SimMode,
) -> Result<Scores> {
    let outcomes: Vec<std::result::Result<Outcome, ComposeError>> = triples
        .par_iter()
        .map(|t| score_one(t, model, config, sim))
        .collect();
    let mut scores = Scores::default();
    for o in outcomes {
        match o? {
            Outcome::Scored(s) => scores.rows.push(s),
            Outcome::Excluded(e) => scores.excluded.push(e),
        }
    }
    Ok(scores)
}

fn score_one<M: SentenceModel>(
    t: &Triple,
    model: &M,
    config: &ComposeConfig,
    sim: SimMode,
) -> std::result::Result<Outcome, ComposeError> {
    let missing: BTreeSet<&str> = t
        .fragments()
        .iter()
        .flat_map(|f| required_lemmas(f, config))
        .filter(|l| !model.contains(l))
        .collect();
    if !missing.is_empty() {
        let reason = format!("oov:{}", missing.into_iter().collect::<Vec<_>>().join(","));
        return Ok(Outcome::Excluded(Exclusion {
            id: t.id.clone(),
            reason,
        }));
    }
    let composed = t.fragments().map(|f| model.compose(f, config));
    let mut reprs = Vec::with_capacity(3);
    for c in composed {
        match c {
            Ok(r) => reprs.push(r),
            Err(ComposeError::Degenerate(_)) => {
                return Ok(Outcome::Excluded(Exclusion {
                    id: t.id.clone(),
                    reason: "degenerate".into(),
                }))
            }
            Err(e) => return Err(e),
        }
    }
    let mean3 = |xs: [Option<f64>; 3]| -> Option<f64> {
        let [a, b, c] = xs;
        Some((a? + b? + c?) / 3.0)
    };
    let entropy_verb = mean3(t.fragments().map(|f| model.verb_entropy(f)));
    let entropy_composed = mean3([
        model.entropy(&reprs[0]),
        model.entropy(&reprs[1]),
        model.entropy(&reprs[2]),
    ]);
    Ok(Outcome::Scored(TripleScore {
        id: t.id.clone(),
        form: t.form,
        sim_apt: model.similarity(&reprs[0], &reprs[1], sim),
        sim_inapt: model.similarity(&reprs[0], &reprs[2], sim),
        human_apt: t.human.apt,
        human_inapt: t.human.inapt,
        entropy_verb,
        entropy_composed,
    }))
}
