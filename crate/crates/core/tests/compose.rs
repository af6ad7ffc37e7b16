mod oracle;

use std::collections::HashMap;

use densem::compose::{
    add, compose_fragment, compose_pair, phaser, pregroup_reduce, ComposeConfig, Fragment, Method,
    OperatorSide, PregroupType, Role, Token,
};
use densem::DensityMatrix;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn diag(xs: &[f64]) -> DensityMatrix {
    DensityMatrix::from_matrix(DMatrix::from_diagonal(
        &nalgebra::DVector::from_column_slice(xs),
    ))
    .unwrap()
}

fn diag_mat(xs: &[f64]) -> oracle::Mat {
    let mut m = oracle::zeros(xs.len());
    for (i, x) in xs.iter().enumerate() {
        m[i][i] = *x;
    }
    m
}

fn dm(m: &oracle::Mat) -> DensityMatrix {
    DensityMatrix::from_matrix(oracle::to_dmatrix(m)).unwrap()
}

fn fragment(spec: &[(&str, Role)]) -> Fragment {
    Fragment::new(spec.iter().map(|(l, r)| Token::new(l, l, *r)).collect())
}

#[test]
fn phaser_on_two_by_two_example() {
    let a = diag(&[1.0, 0.0]);
    let b =
        DensityMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
    let out = phaser(&a, &b).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    assert!((out.as_matrix() - want).amax() <= 1e-12);
}

#[test]
fn add_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 2..8 {
        let a = dm(&oracle::random_density(&mut rng, d, d));
        assert!((add(&a, &a).unwrap().as_matrix() - a.as_matrix()).amax() <= 1e-15);
    }
}

#[test]
fn svo_add_of_equal_matrices_is_that_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = dm(&oracle::random_density(&mut rng, 4, 3));
    let store: HashMap<String, DensityMatrix> = ["s", "v", "o"]
        .iter()
        .map(|w| (w.to_string(), a.clone()))
        .collect();
    let f = fragment(&[("s", Role::Subj), ("v", Role::Verb), ("o", Role::Obj)]);
    let out = compose_fragment(&f, &store, &ComposeConfig::new(Method::Add)).unwrap();
    assert!((out.as_matrix() - a.as_matrix()).amax() <= 1e-15);
}

/// Scripted nesting on dense matrices, written out per pattern.
fn scripted(
    store: &HashMap<String, oracle::Mat>,
    subj: Option<&str>,
    verb: &str,
    obj: Option<&str>,
    method: Method,
    side: OperatorSide,
) -> oracle::Mat {
    let op = |a: &oracle::Mat, b: &oracle::Mat| match method {
        Method::Fuzz => oracle::fuzz(a, b),
        Method::Phaser => oracle::phaser(a, b),
        _ => unreachable!(),
    };
    let step = |verb_side: &oracle::Mat, noun: &oracle::Mat| match side {
        OperatorSide::Verb => op(verb_side, noun),
        OperatorSide::Noun => op(noun, verb_side),
    };
    let mut acc = store[verb].clone();
    if let Some(o) = obj {
        acc = step(&acc, &store[o]);
    }
    if let Some(s) = subj {
        acc = step(&acc, &store[s]);
    }
    acc
}

#[test]
fn nesting_matches_step_by_step_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut dense: HashMap<String, oracle::Mat> = HashMap::new();
    dense.insert("s".into(), diag_mat(&[0.5, 0.3, 0.2]));
    dense.insert("v".into(), oracle::random_density(&mut rng, 3, 3));
    dense.insert("o".into(), oracle::random_density(&mut rng, 3, 2));
    dense.insert("d".into(), diag_mat(&[0.1, 0.6, 0.3]));
    let store: HashMap<String, DensityMatrix> =
        dense.iter().map(|(k, v)| (k.clone(), dm(v))).collect();
    let cases: [(Option<&str>, Option<&str>); 3] =
        [(Some("s"), Some("o")), (Some("d"), None), (None, Some("d"))];
    for (subj, obj) in cases {
        let mut spec = Vec::new();
        if let Some(s) = subj {
            spec.push((s, Role::Subj));
        }
        spec.push(("v", Role::Verb));
        if let Some(o) = obj {
            spec.push((o, Role::Obj));
        }
        let f = fragment(&spec);
        for method in [Method::Fuzz, Method::Phaser] {
            for side in [OperatorSide::Verb, OperatorSide::Noun] {
                let got = compose_fragment(&f, &store, &ComposeConfig::new(method).with_side(side))
                    .unwrap();
                let want = scripted(&dense, subj, "v", obj, method, side);
                let dist =
                    oracle::frobenius_distance(&oracle::from_dmatrix(got.as_matrix()), &want);
                assert!(dist <= 1e-8, "{method} {side:?} {subj:?} {obj:?}: {dist}");
            }
        }
    }
    let svo = fragment(&[("s", Role::Subj), ("v", Role::Verb), ("o", Role::Obj)]);
    let verb_side = compose_fragment(&svo, &store, &ComposeConfig::new(Method::Fuzz)).unwrap();
    let noun_side = compose_fragment(
        &svo,
        &store,
        &ComposeConfig::new(Method::Fuzz).with_side(OperatorSide::Noun),
    )
    .unwrap();
    assert!(
        (verb_side.as_matrix() - noun_side.as_matrix()).amax() > 1e-6,
        "operator side matters"
    );
}

#[test]
fn modifiers_act_on_their_noun_before_the_verb_sees_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let words = ["bright", "student", "grasp", "new", "idea"];
    let dense: HashMap<String, oracle::Mat> = words
        .iter()
        .map(|w| (w.to_string(), oracle::random_density(&mut rng, 4, 4)))
        .collect();
    let store: HashMap<String, DensityMatrix> =
        dense.iter().map(|(k, v)| (k.clone(), dm(v))).collect();
    let f = fragment(&[
        ("bright", Role::Adj),
        ("student", Role::Subj),
        ("grasp", Role::Verb),
        ("new", Role::Adj),
        ("idea", Role::Obj),
    ]);
    for side in [OperatorSide::Verb, OperatorSide::Noun] {
        let got = compose_fragment(
            &f,
            &store,
            &ComposeConfig::new(Method::Fuzz).with_side(side),
        )
        .unwrap();
        let subj = oracle::fuzz(&dense["bright"], &dense["student"]);
        let obj = oracle::fuzz(&dense["new"], &dense["idea"]);
        let step = |v: &oracle::Mat, n: &oracle::Mat| match side {
            OperatorSide::Verb => oracle::fuzz(v, n),
            OperatorSide::Noun => oracle::fuzz(n, v),
        };
        let want = step(&step(&dense["grasp"], &obj), &subj);
        assert!(oracle::frobenius_distance(&oracle::from_dmatrix(got.as_matrix()), &want) <= 1e-8);
    }
}

#[test]
fn function_words_are_skipped_unless_included() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let store: HashMap<String, DensityMatrix> = ["he", "shower", "her", "present"]
        .iter()
        .map(|w| (w.to_string(), dm(&oracle::random_density(&mut rng, 3, 3))))
        .collect();
    let f = fragment(&[
        ("he", Role::Function),
        ("shower", Role::Verb),
        ("her", Role::Function),
        ("present", Role::Obj),
    ]);
    let plain = compose_fragment(&f, &store, &ComposeConfig::new(Method::Add)).unwrap();
    let two = add(&store["shower"], &store["present"]).unwrap();
    assert!((plain.as_matrix() - two.as_matrix()).amax() <= 1e-15);
    let cfg = ComposeConfig {
        include_function_words: true,
        ..ComposeConfig::new(Method::Add)
    };
    let all = compose_fragment(&f, &store, &cfg).unwrap();
    assert!((all.as_matrix() - plain.as_matrix()).amax() > 1e-6);
    let mut missing = store.clone();
    missing.remove("her");
    assert!(compose_fragment(&f, &missing, &ComposeConfig::new(Method::Add)).is_ok());
    assert!(compose_fragment(&f, &missing, &cfg).is_err());
}

#[test]
fn compose_pair_rejects_verb_only() {
    let a = diag(&[0.5, 0.5]);
    assert!(compose_pair(&a, &a, Method::VerbOnly).is_err());
}

fn simple_types() -> Vec<PregroupType> {
    (0..6u8)
        .map(|s| oracle::symbol_name(s).parse().unwrap())
        .collect()
}

#[test]
fn worked_transitive_reduction() {
    let types: Vec<PregroupType> = ["n", "n^r s n^l", "n"]
        .iter()
        .map(|t| t.parse().unwrap())
        .collect();
    let r = pregroup_reduce(&types);
    assert!(r.grammatical);
    assert_eq!(
        r.residual
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
        vec!["s"]
    );
}

#[test]
fn reducer_agrees_with_exhaustive_search_up_to_eight_types() {
    let table = simple_types();
    let mut search = oracle::PregroupSearch::new(8);
    let mut list: Vec<u8> = Vec::new();
    let mut checked = 0usize;
    for len in 1..=8u32 {
        for code in 0..6usize.pow(len) {
            list.clear();
            let mut c = code;
            for _ in 0..len {
                list.push((c % 6) as u8);
                c /= 6;
            }
            let types: Vec<PregroupType> =
                list.iter().map(|&s| table[s as usize].clone()).collect();
            let r = pregroup_reduce(&types);
            let expect = search.reaches_s(&list);
            assert_eq!(r.grammatical, expect, "{list:?}");
            let residual: Vec<u8> = r
                .residual
                .iter()
                .map(|t| {
                    (0..6u8)
                        .find(|&s| oracle::symbol_name(s) == t.to_string())
                        .unwrap()
                })
                .collect();
            if expect {
                assert_eq!(residual, vec![oracle::S]);
            } else {
                assert!(
                    oracle::is_irreducible(&residual),
                    "{list:?} -> {residual:?}"
                );
                if len <= 6 {
                    assert!(
                        oracle::reaches(&list, &residual),
                        "{list:?} -> {residual:?}"
                    );
                }
            }
            checked += 1;
        }
    }
    assert_eq!(checked, (1..=8).map(|l| 6usize.pow(l)).sum::<usize>());
}
