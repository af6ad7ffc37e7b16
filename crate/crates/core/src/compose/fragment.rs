use serde::{Deserialize, Serialize};

use super::{
    add_all, compose_pair, mult_all, ComposeConfig, ComposeError, ComposeResult, Method,
    OperatorSide,
};
use crate::linalg::DensityMatrix;
use crate::store::MatrixLookup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subj,
    Verb,
    Obj,
    Adj,
    Function,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Short,
    Long,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Short => "short",
            Form::Long => "long",
        }
    }
}

impl std::str::FromStr for Form {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(Form::Short),
            "long" => Ok(Form::Long),
            other => Err(format!("unknown form `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub role: Role,
}

impl Token {
    pub fn new(surface: &str, lemma: &str, role: Role) -> Self {
        Self {
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            role,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    Sv,
    Vo,
    Svo,
}

/// A role-annotated phrase with exactly one verb.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub tokens: Vec<Token>,
}

impl Fragment {
    pub fn new(tokens: Vec<Token>) -> Self {
        Self { tokens }
    }

    pub fn pattern(&self) -> ComposeResult<Pattern> {
        let count = |r: Role| self.tokens.iter().filter(|t| t.role == r).count();
        let (verbs, subjs, objs) = (count(Role::Verb), count(Role::Subj), count(Role::Obj));
        let invalid = |msg: String| Err(ComposeError::InvalidFragment(msg));
        if verbs != 1 {
            return invalid(format!("expected exactly one verb, found {verbs}"));
        }
        if subjs > 1 || objs > 1 {
            return invalid("at most one subject and one object are allowed".into());
        }
        match (subjs, objs) {
            (1, 1) => Ok(Pattern::Svo),
            (1, 0) => Ok(Pattern::Sv),
            (0, 1) => Ok(Pattern::Vo),
            _ => invalid("a fragment needs a subject or an object".into()),
        }
    }

    pub fn verb(&self) -> Option<&Token> {
        self.tokens.iter().find(|t| t.role == Role::Verb)
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn included(role: Role, include_function_words: bool) -> bool {
    role != Role::Function || include_function_words
}

/// Lemmas that composition under `config` will look up, in token order.
pub fn required_lemmas<'a>(fragment: &'a Fragment, config: &ComposeConfig) -> Vec<&'a str> {
    fragment
        .tokens
        .iter()
        .filter(|t| included(t.role, config.include_function_words))
        .map(|t| t.lemma.as_str())
        .collect()
}

/// Composes a fragment as `subj ∘ (verb ∘ (adj ∘ obj))`.
///
/// Add and mult combine every included token at once. Fuzz and phaser nest
/// binary steps: modifiers act on the nearest following noun head (else the
/// preceding one, else the verb), nearest first; the verb side acts on its
/// object and then on the subject, or the nouns act on the verb side when the
/// operator side is `Noun`.
pub fn compose_fragment<L: MatrixLookup + ?Sized>(
    fragment: &Fragment,
    store: &L,
    config: &ComposeConfig,
) -> ComposeResult<DensityMatrix> {
    fragment.pattern()?;
    let mut missing: Vec<String> = Vec::new();
    for lemma in required_lemmas(fragment, config) {
        if store.lookup(lemma).is_none() && !missing.iter().any(|m| m == lemma) {
            missing.push(lemma.to_string());
        }
    }
    if !missing.is_empty() {
        return Err(ComposeError::Oov(missing));
    }
    let get = |i: usize| {
        store
            .lookup(&fragment.tokens[i].lemma)
            .expect("presence checked")
    };
    let tokens = &fragment.tokens;
    let idx: Vec<usize> = (0..tokens.len())
        .filter(|&i| included(tokens[i].role, config.include_function_words))
        .collect();

    match config.method {
        Method::VerbOnly => {
            let v = idx
                .iter()
                .find(|&&i| tokens[i].role == Role::Verb)
                .expect("pattern has a verb");
            Ok(get(*v).clone())
        }
        Method::Add => add_all(&idx.iter().map(|&i| get(i)).collect::<Vec<_>>()),
        Method::Mult => mult_all(&idx.iter().map(|&i| get(i)).collect::<Vec<_>>()),
        Method::Fuzz | Method::Phaser => {
            let method = config.method;
            let head_of = |role: Role| idx.iter().copied().find(|&i| tokens[i].role == role);
            let verb = head_of(Role::Verb).expect("pattern has a verb");
            let heads: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| matches!(tokens[i].role, Role::Subj | Role::Obj))
                .collect();

            let mut attached: Vec<(usize, usize)> = Vec::new();
            for &i in idx
                .iter()
                .filter(|&&i| matches!(tokens[i].role, Role::Adj | Role::Function))
            {
                let head = heads
                    .iter()
                    .copied()
                    .find(|&h| h > i)
                    .or_else(|| heads.iter().copied().rev().find(|&h| h < i))
                    .unwrap_or(verb);
                attached.push((head, i));
            }
            let phrase = |head: usize| -> ComposeResult<DensityMatrix> {
                let mut mods: Vec<usize> = attached
                    .iter()
                    .filter(|(h, _)| *h == head)
                    .map(|(_, m)| *m)
                    .collect();
                mods.sort_by_key(|&m| (m.abs_diff(head), m > head));
                let mut acc = get(head).clone();
                for m in mods {
                    acc = compose_pair(get(m), &acc, method)?;
                }
                Ok(acc)
            };

            let step = |verb_side: &DensityMatrix, noun: &DensityMatrix| match config.operator_side
            {
                OperatorSide::Verb => compose_pair(verb_side, noun, method),
                OperatorSide::Noun => compose_pair(noun, verb_side, method),
            };
            let mut vp = phrase(verb)?;
            if let Some(obj) = head_of(Role::Obj) {
                vp = step(&vp, &phrase(obj)?)?;
            }
            if let Some(subj) = head_of(Role::Subj) {
                vp = step(&vp, &phrase(subj)?)?;
            }
            Ok(vp)
        }
    }
}
