//! Pregroup types over the basic types `n` and `s`, with single left/right adjoints.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::compose::{Fragment, Pattern, Role};
use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    N,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Adjoint {
    Left,
    None,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleType {
    pub base: Base,
    pub adjoint: Adjoint,
}

impl SimpleType {
    pub const N: Self = Self {
        base: Base::N,
        adjoint: Adjoint::None,
    };
    pub const S: Self = Self {
        base: Base::S,
        adjoint: Adjoint::None,
    };

    pub fn new(base: Base, adjoint: Adjoint) -> Self {
        Self { base, adjoint }
    }

    /// True when `self · next ≤ 1`, i.e. `x^l x` or `x x^r`.
    pub fn cancels_with(self, next: SimpleType) -> bool {
        self.base == next.base
            && matches!(
                (self.adjoint, next.adjoint),
                (Adjoint::Left, Adjoint::None) | (Adjoint::None, Adjoint::Right)
            )
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.base {
            Base::N => "n",
            Base::S => "s",
        };
        match self.adjoint {
            Adjoint::Left => write!(f, "{b}^l"),
            Adjoint::None => write!(f, "{b}"),
            Adjoint::Right => write!(f, "{b}^r"),
        }
    }
}

impl std::str::FromStr for SimpleType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (b, adj) = match s.split_once('^') {
            Some((b, "l")) => (b, Adjoint::Left),
            Some((b, "r")) => (b, Adjoint::Right),
            Some(_) => return Err(format!("bad adjoint in `{s}`")),
            None => (s, Adjoint::None),
        };
        let base = match b {
            "n" => Base::N,
            "s" => Base::S,
            _ => return Err(format!("unknown basic type `{b}`")),
        };
        Ok(Self { base, adjoint: adj })
    }
}

/// A word's type: a nonempty juxtaposition of simple types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PregroupType(Vec<SimpleType>);

impl PregroupType {
    pub fn new(simple: Vec<SimpleType>) -> std::result::Result<Self, String> {
        if simple.is_empty() {
            return Err("empty pregroup type".into());
        }
        Ok(Self(simple))
    }

    pub fn simple(&self) -> &[SimpleType] {
        &self.0
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

impl std::str::FromStr for PregroupType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let simple = s
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(simple)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub grammatical: bool,
    /// `[s]` when grammatical, otherwise the irreducible residue of a left-to-right reduction.
    pub residual: Vec<SimpleType>,
}

/// Decides whether the concatenated types reduce to exactly `s`.
///
/// Contractions are not confluent in general (`n^l n n^r` has two normal
/// forms), so grammaticality is decided over all contraction orders: some
/// `s` must survive while everything before it and everything after it
/// contracts away.
pub fn pregroup_reduce(types: &[PregroupType]) -> Reduction {
    let flat: Vec<SimpleType> = types.iter().flat_map(|t| t.0.iter().copied()).collect();
    let n = flat.len();
    // empty[i][j]: flat[i..j] contracts to nothing
    let mut empty = vec![vec![false; n + 1]; n + 1];
    for (i, row) in empty.iter_mut().enumerate() {
        row[i] = true;
    }
    for len in (2..=n).step_by(2) {
        for i in 0..=(n - len) {
            let j = i + len;
            empty[i][j] = (i + 1..j)
                .step_by(2)
                .any(|k| flat[i].cancels_with(flat[k]) && empty[i + 1][k] && empty[k + 1][j]);
        }
    }
    let grammatical = (0..n).any(|p| flat[p] == SimpleType::S && empty[0][p] && empty[p + 1][n]);
    let residual = if grammatical {
        vec![SimpleType::S]
    } else {
        greedy_normal_form(&flat)
    };
    Reduction {
        grammatical,
        residual,
    }
}

fn greedy_normal_form(flat: &[SimpleType]) -> Vec<SimpleType> {
    let mut stack: Vec<SimpleType> = Vec::with_capacity(flat.len());
    for &t in flat {
        match stack.last() {
            Some(&top) if top.cancels_with(t) => {
                stack.pop();
            }
            _ => stack.push(t),
        }
    }
    stack
}

/// Role-to-type assignments; verbs are keyed by the fragment pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    types: HashMap<String, PregroupType>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let pairs = [
            ("subj", "n"),
            ("obj", "n"),
            ("noun", "n"),
            ("verb.sv", "n^r s"),
            ("verb.vo", "s n^l"),
            ("verb.svo", "n^r s n^l"),
            ("adj", "n n^l"),
        ];
        let types = pairs
            .iter()
            .map(|(k, t)| (k.to_string(), t.parse().expect("built-in types parse")))
            .collect();
        Self { types }
    }
}

impl Lexicon {
    pub fn get(&self, key: &str) -> Option<&PregroupType> {
        self.types.get(key)
    }

    pub fn insert(&mut self, key: &str, ty: PregroupType) {
        self.types.insert(key.to_string(), ty);
    }

    /// Reads `role<TAB>type` lines over the defaults. Blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let mut lex = Self::default();
        for (i, line) in io::read_to_string(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (role, ty) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `role<TAB>type`"))?;
            let ty = ty
                .parse()
                .map_err(|e: String| Error::parse(path, i + 1, e))?;
            lex.insert(role.trim(), ty);
        }
        Ok(lex)
    }

    fn type_for(&self, role: Role, pattern: Pattern) -> Option<&PregroupType> {
        match role {
            Role::Subj => self.get("subj").or_else(|| self.get("noun")),
            Role::Obj => self.get("obj").or_else(|| self.get("noun")),
            Role::Adj => self.get("adj"),
            Role::Verb => self.get(match pattern {
                Pattern::Sv => "verb.sv",
                Pattern::Vo => "verb.vo",
                Pattern::Svo => "verb.svo",
            }),
            Role::Function => self.get("function"),
        }
    }

    /// Types the fragment's tokens and reduces them. Tokens whose role has no
    /// entry (function words by default) are left out.
    pub fn check(
        &self,
        fragment: &Fragment,
    ) -> std::result::Result<Reduction, crate::compose::ComposeError> {
        let pattern = fragment.pattern()?;
        let types: Vec<PregroupType> = fragment
            .tokens
            .iter()
            .filter_map(|t| self.type_for(t.role, pattern).cloned())
            .collect();
        Ok(pregroup_reduce(&types))
    }
}
