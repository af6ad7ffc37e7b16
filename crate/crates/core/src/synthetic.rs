//! Small generated corpora and datasets with known structure.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compose::{Form, Fragment, Role, Token};
use crate::eval::{HumanRatings, Triple};

pub const PLANTED_WORD: &str = "bank";
pub const RIVER_WORDS: [&str; 10] = [
    "river", "water", "shore", "fish", "boat", "stream", "mud", "reed", "current", "flood",
];
pub const MONEY_WORDS: [&str; 10] = [
    "money", "loan", "cash", "account", "deposit", "credit", "interest", "teller", "savings",
    "mortgage",
];

/// Sentences of 8 tokens drawn from one of two topics, alternating. Half of
/// the sentences contain the ambiguous word, so it co-occurs with both topics.
pub fn planted_ambiguity_corpus(seed: u64, n_tokens: usize) -> Vec<Vec<String>> {
    const LEN: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_tokens / LEN + 1);
    let mut total = 0;
    let mut topic = 0;
    while total < n_tokens {
        let words: &[&str] = if topic == 0 {
            &RIVER_WORDS
        } else {
            &MONEY_WORDS
        };
        topic ^= 1;
        let mut s: Vec<String> = (0..LEN)
            .map(|_| words.choose(&mut rng).expect("nonempty").to_string())
            .collect();
        if rng.random_bool(0.5) {
            let pos = rng.random_range(0..LEN);
            s[pos] = PLANTED_WORD.to_string();
        }
        total += s.len();
        out.push(s);
    }
    out
}

struct ToyEntry {
    id: &'static str,
    subj: Option<&'static str>,
    obj: Option<&'static str>,
    target: &'static str,
    apt: &'static str,
    inapt: &'static str,
    literal_subj: &'static str,
    literal_obj: &'static str,
    human: (f64, f64),
}

const TOY: [ToyEntry; 12] = [
    ToyEntry {
        id: "t01",
        subj: Some("student"),
        obj: Some("idea"),
        target: "grasp",
        apt: "understand",
        inapt: "clutch",
        literal_subj: "climber",
        literal_obj: "rope",
        human: (6.4, 1.8),
    },
    ToyEntry {
        id: "t02",
        subj: Some("price"),
        obj: None,
        target: "soar",
        apt: "rise",
        inapt: "glide",
        literal_subj: "eagle",
        literal_obj: "sky",
        human: (6.1, 2.2),
    },
    ToyEntry {
        id: "t03",
        subj: None,
        obj: Some("book"),
        target: "devour",
        apt: "read",
        inapt: "eat",
        literal_subj: "wolf",
        literal_obj: "meat",
        human: (5.2, 2.9),
    },
    ToyEntry {
        id: "t04",
        subj: Some("critic"),
        obj: Some("plan"),
        target: "attack",
        apt: "criticize",
        inapt: "assault",
        literal_subj: "soldier",
        literal_obj: "fort",
        human: (5.9, 2.4),
    },
    ToyEntry {
        id: "t05",
        subj: Some("rumor"),
        obj: None,
        target: "spread",
        apt: "circulate",
        inapt: "smear",
        literal_subj: "butter",
        literal_obj: "bread",
        human: (6.6, 1.5),
    },
    ToyEntry {
        id: "t06",
        subj: None,
        obj: Some("engine"),
        target: "kill",
        apt: "stop",
        inapt: "murder",
        literal_subj: "assassin",
        literal_obj: "victim",
        human: (5.5, 1.9),
    },
    ToyEntry {
        id: "t07",
        subj: Some("widow"),
        obj: Some("sorrow"),
        target: "drown",
        apt: "forget",
        inapt: "submerge",
        literal_subj: "sailor",
        literal_obj: "sea",
        human: (4.8, 2.6),
    },
    ToyEntry {
        id: "t08",
        subj: Some("time"),
        obj: None,
        target: "fly",
        apt: "pass",
        inapt: "flutter",
        literal_subj: "bird",
        literal_obj: "wing",
        human: (6.2, 2.0),
    },
    ToyEntry {
        id: "t09",
        subj: None,
        obj: Some("pride"),
        target: "swallow",
        apt: "suppress",
        inapt: "gulp",
        literal_subj: "diner",
        literal_obj: "soup",
        human: (5.7, 1.6),
    },
    ToyEntry {
        id: "t10",
        subj: Some("leader"),
        obj: Some("dispute"),
        target: "bury",
        apt: "settle",
        inapt: "inter",
        literal_subj: "gravedigger",
        literal_obj: "coffin",
        human: (5.0, 3.1),
    },
    ToyEntry {
        id: "t11",
        subj: Some("market"),
        obj: None,
        target: "crash",
        apt: "collapse",
        inapt: "collide",
        literal_subj: "car",
        literal_obj: "wall",
        human: (6.0, 2.7),
    },
    ToyEntry {
        id: "t12",
        subj: None,
        obj: Some("fact"),
        target: "digest",
        apt: "absorb",
        inapt: "metabolize",
        literal_subj: "stomach",
        literal_obj: "food",
        human: (4.5, 3.3),
    },
];

const ABSTRACT_WORDS: [&str; 6] = ["mind", "concept", "news", "society", "economy", "thought"];
const PHYSICAL_WORDS: [&str; 6] = ["hand", "body", "stone", "ground", "animal", "metal"];

fn fragment(subj: Option<&str>, verb: &str, obj: Option<&str>) -> Fragment {
    let mut tokens = Vec::new();
    if let Some(s) = subj {
        tokens.push(Token::new(s, s, Role::Subj));
    }
    tokens.push(Token::new(verb, verb, Role::Verb));
    if let Some(o) = obj {
        tokens.push(Token::new(o, o, Role::Obj));
    }
    Fragment::new(tokens)
}

/// Twelve short-form triples over the vocabulary of [`toy_corpus`].
pub fn toy_triples() -> Vec<Triple> {
    TOY.iter()
        .map(|e| Triple {
            id: e.id.to_string(),
            form: Form::Short,
            human: HumanRatings {
                apt: e.human.0,
                inapt: e.human.1,
            },
            target: fragment(e.subj, e.target, e.obj),
            apt: fragment(e.subj, e.apt, e.obj),
            inapt: fragment(e.subj, e.inapt, e.obj),
        })
        .collect()
}

/// Sentences in which each target verb appears both with its metaphorical
/// arguments (next to the apt verb) and with literal ones (next to the inapt verb).
pub fn toy_corpus(seed: u64, sentences_per_sense: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    for _ in 0..sentences_per_sense {
        for e in &TOY {
            for literal in [false, true] {
                let (subj, obj, partner, pool) = if literal {
                    (e.literal_subj, e.literal_obj, e.inapt, &PHYSICAL_WORDS)
                } else {
                    (
                        e.subj.unwrap_or(ABSTRACT_WORDS[0]),
                        e.obj.unwrap_or(ABSTRACT_WORDS[1]),
                        e.apt,
                        &ABSTRACT_WORDS,
                    )
                };
                let verb = if rng.random_bool(0.5) {
                    e.target
                } else {
                    partner
                };
                let mut words = vec![subj, verb, obj];
                for _ in 0..2 {
                    words.push(pool.choose(&mut rng).expect("nonempty"));
                }
                if rng.random_bool(0.5) {
                    words.swap(0, 2);
                }
                lines.push(words.join(" "));
            }
        }
    }
    lines
}
